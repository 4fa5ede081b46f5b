use serde::{Deserialize, Serialize};

use super::format::{FactorIndex, PSTensor};
use crate::error::{invalid, Error, Result};
use crate::linalg::{LinearAlgebra, Matrix, DEFAULT_RANK_TAU};
use crate::par::{self, Exec};

/// Formats with more coefficients than this only get factor-subset splits.
pub const DEFAULT_FLATTENING_CAP: usize = 20_000;

/// Hard limit beyond which no flattening is attempted.
pub const HARD_FLATTENING_LIMIT: usize = 1 << 22;

fn mixed_radix_decode(mut idx: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        out[i] = idx % radices[i];
        idx /= radices[i];
    }
    out
}

/// Catalecticant-style unfolding: rows are exponent tuples of degrees
/// `split`, columns of degrees `d - split`, entry = coefficient at the sum.
pub fn flatten<T: LinearAlgebra>(tensor: &PSTensor<T>, split: &[usize]) -> Result<Matrix<T>> {
    let format = &tensor.format;
    if split.len() != format.k() {
        return Err(invalid(format!(
            "split has {} entries, format has {} factors",
            split.len(),
            format.k()
        )));
    }
    if split.iter().zip(format.degrees()).any(|(s, d)| s > d) {
        return Err(invalid(format!(
            "split {split:?} exceeds degrees {:?}",
            format.degrees()
        )));
    }
    let full = format.factor_indices();
    let mut row_radix = Vec::new();
    let mut col_radix = Vec::new();
    // per factor: table[r][c] = position of row tuple r + col tuple c
    let mut tables: Vec<Vec<Vec<usize>>> = Vec::new();
    for i in 0..format.k() {
        let n = format.dims()[i];
        let rows = FactorIndex::new(n, split[i]);
        let cols = FactorIndex::new(n, format.degrees()[i] - split[i]);
        let table = rows
            .tuples
            .iter()
            .map(|r| {
                cols.tuples
                    .iter()
                    .map(|c| {
                        let sum: Vec<usize> = r.iter().zip(c).map(|(a, b)| a + b).collect();
                        full[i]
                            .position(&sum)
                            .expect("sum of exponent tuples has full degree")
                    })
                    .collect()
            })
            .collect();
        row_radix.push(rows.len());
        col_radix.push(cols.len());
        tables.push(table);
    }
    let n_rows: usize = row_radix.iter().product();
    let n_cols: usize = col_radix.iter().product();
    let col_digits: Vec<Vec<usize>> = (0..n_cols)
        .map(|c| mixed_radix_decode(c, &col_radix))
        .collect();
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for r in 0..n_rows {
        let rd = mixed_radix_decode(r, &row_radix);
        for cd in &col_digits {
            let positions: Vec<usize> = (0..format.k()).map(|i| tables[i][rd[i]][cd[i]]).collect();
            data.push(tensor.coeffs[format.global_index(&positions)].clone());
        }
    }
    Matrix::new(n_rows, n_cols, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRank {
    pub split: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
}

/// Flattening ranks over all admissible splits; `max_rank` lower-bounds the
/// border rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatteningReport {
    pub ranks: Vec<SplitRank>,
    pub max_rank: usize,
    /// Set when the format exceeded the cap and only factor-subset splits ran.
    pub partial: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct FlatteningOptions {
    pub cap: usize,
    pub tau: f64,
    pub exec: Exec,
}

impl Default for FlatteningOptions {
    fn default() -> Self {
        FlatteningOptions {
            cap: DEFAULT_FLATTENING_CAP,
            tau: DEFAULT_RANK_TAU,
            exec: Exec::Auto,
        }
    }
}

fn enumerate_splits(degrees: &[usize], subsets_only: bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &d in degrees {
        let choices: Vec<usize> = if subsets_only {
            vec![0, d]
        } else {
            (0..=d).collect()
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&s| {
                    let mut p = prefix.clone();
                    p.push(s);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn flattening_report<T: LinearAlgebra>(tensor: &PSTensor<T>) -> Result<FlatteningReport> {
    flattening_report_with(tensor, &FlatteningOptions::default())
}

pub fn flattening_report_with<T: LinearAlgebra>(
    tensor: &PSTensor<T>,
    opts: &FlatteningOptions,
) -> Result<FlatteningReport> {
    let format = &tensor.format;
    let size = format.len();
    if size > HARD_FLATTENING_LIMIT {
        return Err(Error::CapExceeded {
            size,
            cap: opts.cap,
        });
    }
    let partial = size > opts.cap;
    let degrees = format.degrees();
    let side = |s: &[usize]| -> (usize, usize) {
        let mut rows = 1;
        let mut cols = 1;
        for i in 0..format.k() {
            let n = format.dims()[i];
            rows *= super::format::binomial(s[i] + n, n);
            cols *= super::format::binomial(degrees[i] - s[i] + n, n);
        }
        (rows, cols)
    };
    // complementary splits give transposed matrices; compute one of each pair
    let canonical: Vec<Vec<usize>> = enumerate_splits(degrees, partial)
        .into_iter()
        .filter(|s| {
            let comp: Vec<usize> = s.iter().zip(degrees).map(|(a, d)| d - a).collect();
            let (r, c) = side(s);
            r >= 2 && c >= 2 && *s <= comp
        })
        .collect();
    let computed = par::map_ref(opts.exec, &canonical, |s| -> Result<SplitRank> {
        let m = flatten(tensor, s)?;
        let rank = T::rank_of(&m, opts.tau)?;
        Ok(SplitRank {
            split: s.clone(),
            rows: m.rows(),
            cols: m.cols(),
            rank,
        })
    });
    let mut ranks = Vec::new();
    for entry in computed {
        let entry = entry?;
        let comp: Vec<usize> = entry
            .split
            .iter()
            .zip(degrees)
            .map(|(a, d)| d - a)
            .collect();
        if comp != entry.split {
            ranks.push(SplitRank {
                split: comp,
                rows: entry.cols,
                cols: entry.rows,
                rank: entry.rank,
            });
        }
        ranks.push(entry);
    }
    ranks.sort_by(|a, b| a.split.cmp(&b.split));
    let nonzero = if tensor.is_zero() { 0 } else { 1 };
    let max_rank = ranks.iter().map(|r| r.rank).max().unwrap_or(nonzero);
    Ok(FlatteningReport {
        ranks,
        max_rank,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_rank;
    use crate::scalar::int;
    use crate::tensorspace::format::{embed, Format, ProductPoint};
    use num_rational::BigRational;

    fn t(format: &Format, v: &[i64]) -> PSTensor<BigRational> {
        PSTensor::new(format.clone(), v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn hankel_example() {
        let f = Format::new(vec![1], vec![3]).unwrap();
        let m = flatten(&t(&f, &[0, 1, 0, 0]), &[2]).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.row(0), &[int(0), int(1)]);
        assert_eq!(m.row(1), &[int(1), int(0)]);
        assert_eq!(m.row(2), &[int(0), int(0)]);
        assert_eq!(mat_rank(&m).unwrap(), 2);
        assert!(flatten(&t(&f, &[0, 1, 0, 0]), &[4]).is_err());
    }

    #[test]
    fn rank_one_everywhere() {
        let f = Format::new(vec![2, 1], vec![2, 2]).unwrap();
        let x =
            ProductPoint::new(vec![vec![int(1), int(-2), int(3)], vec![int(2), int(5)]]).unwrap();
        let p = embed(&f, &x).unwrap();
        let rep = flattening_report(&p).unwrap();
        assert_eq!(rep.max_rank, 1);
        assert!(!rep.ranks.is_empty());
        assert!(!rep.partial);
    }

    #[test]
    fn w_state_has_rank_two() {
        let f = Format::segre_p1(3).unwrap();
        // e_100 + e_010 + e_001 in index order 000..111 (x0 = index 0)
        let mut v = vec![0; 8];
        v[0b011] = 1;
        v[0b101] = 1;
        v[0b110] = 1;
        let rep = flattening_report(&t(&f, &v)).unwrap();
        assert_eq!(rep.max_rank, 2);
    }

    #[test]
    fn cap_switches_to_subsets() {
        let f = Format::new(vec![1], vec![4]).unwrap();
        let p = t(&f, &[1, 0, 0, 0, 1]);
        let full = flattening_report(&p).unwrap();
        assert_eq!(full.max_rank, 2);
        let opts = FlatteningOptions {
            cap: 2,
            ..Default::default()
        };
        let capped = flattening_report_with(&p, &opts).unwrap();
        assert!(capped.partial);
        assert!(capped.ranks.is_empty());
    }
}
