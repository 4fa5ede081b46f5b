//! Dense linear algebra over both scalar fields.
//!
//! Exact matrices use fraction-free (Bareiss) elimination for ranks and
//! Gauss-Jordan over rationals for kernels; approximate matrices go through
//! an SVD with a relative singular-value threshold.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::scalar::{norm, Scalar};

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TAU: f64 = 1e-10;

/// Row-major dense matrix; the element type is the field tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged matrix rows"));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    /// Builds the matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(invalid("column vectors have different lengths"));
        }
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for c in columns {
                data.push(c[i].clone());
            }
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_complex(&self) -> Matrix<Complex64> {
        self.map(Scalar::to_complex)
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(Scalar::is_finite) {
            Ok(())
        } else {
            Err(invalid("non-finite matrix entry"))
        }
    }
}

/// Field-specific kernels behind [`mat_rank`], [`kernel_basis`] and [`solve_in_span`].
pub trait LinearAlgebra: Scalar {
    fn rank_of(m: &Matrix<Self>, tau: f64) -> Result<usize>;
    fn kernel_of(m: &Matrix<Self>, tau: f64) -> Result<Vec<Vec<Self>>>;
    fn solve_span(target: &[Self], generators: &[Vec<Self>], tol: f64)
        -> Result<Option<Vec<Self>>>;
}

pub fn mat_rank<T: LinearAlgebra>(m: &Matrix<T>) -> Result<usize> {
    T::rank_of(m, DEFAULT_RANK_TAU)
}

pub fn mat_rank_tau<T: LinearAlgebra>(m: &Matrix<T>, tau: f64) -> Result<usize> {
    T::rank_of(m, tau)
}

pub fn kernel_basis<T: LinearAlgebra>(m: &Matrix<T>) -> Result<Vec<Vec<T>>> {
    T::kernel_of(m, DEFAULT_RANK_TAU)
}

/// Coefficients `c` with `sum c_i g_i = target`, or `None` when the target is
/// outside the span. `tol` is relative and only used by the approximate field.
pub fn solve_in_span<T: LinearAlgebra>(
    target: &[T],
    generators: &[Vec<T>],
    tol: f64,
) -> Result<Option<Vec<T>>> {
    if generators.iter().any(|g| g.len() != target.len()) {
        return Err(invalid("generator and target lengths differ"));
    }
    if !target.iter().all(Scalar::is_finite) || !generators.iter().flatten().all(Scalar::is_finite)
    {
        return Err(invalid("non-finite vector entry"));
    }
    T::solve_span(target, generators, tol)
}

/// Like [`solve_in_span`] but maps "not in span" to [`Error::NotInSpan`].
pub fn require_in_span<T: LinearAlgebra>(
    target: &[T],
    generators: &[Vec<T>],
    tol: f64,
) -> Result<Vec<T>> {
    solve_in_span(target, generators, tol)?.ok_or(Error::NotInSpan)
}

pub fn linear_combination<T: Scalar>(coeffs: &[T], vectors: &[Vec<T>], len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); len];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.clone() + c.clone() * x.clone();
        }
    }
    out
}

// ---------------------------------------------------------------- exact ----

fn lcm_of_denominators(row: &[BigRational]) -> BigInt {
    row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Fraction-free elimination on the integer-scaled rows.
pub fn bareiss_rank(m: &Matrix<BigRational>) -> usize {
    let cols = m.cols;
    let mut a: Vec<Vec<BigInt>> = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let l = lcm_of_denominators(row);
            row.iter()
                .map(|q| (q * BigRational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .filter(|r: &Vec<BigInt>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[col].clone();
        for row in rest.iter_mut() {
            let factor = row[col].clone();
            for j in col + 1..cols {
                let v = &pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = if prev.is_one() { v } else { v / &prev };
            }
            row[col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
        // rows that became identically zero never pivot again
        let remaining_nonzero = a[rank..]
            .iter()
            .any(|r| r[col + 1..].iter().any(|x| !x.is_zero()));
        if !remaining_nonzero {
            break;
        }
    }
    rank
}

/// Reduced row echelon form over the rationals; returns pivot columns.
pub fn rref(m: &mut Matrix<BigRational>) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = m.get(r, c).recip();
        for j in c..cols {
            let v = m.get(r, j) * &inv;
            m.set(r, j, v);
        }
        for i in 0..rows {
            if i == r || m.get(i, c).is_zero() {
                continue;
            }
            let f = m.get(i, c).clone();
            for j in c..cols {
                let v = m.get(i, j) - &f * m.get(r, j);
                m.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn exact_kernel(m: &Matrix<BigRational>) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let cols = m.cols;
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a.get(r, f).clone();
            }
            v
        })
        .collect()
}

fn exact_solve_span(
    target: &[BigRational],
    generators: &[Vec<BigRational>],
) -> Option<Vec<BigRational>> {
    let g = generators.len();
    let len = target.len();
    // Incremental echelon basis over rows of [G | t]; stop once G has full column rank.
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut scanned = 0;
    for i in 0..len {
        scanned = i + 1;
        let mut row: Vec<BigRational> = generators.iter().map(|gen| gen[i].clone()).collect();
        row.push(target[i].clone());
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        for (p, b) in &basis {
            if row[*p].is_zero() {
                continue;
            }
            let f = &row[*p] / &b[*p];
            for j in 0..=g {
                if !b[j].is_zero() {
                    row[j] = &row[j] - &f * &b[j];
                }
            }
        }
        match (0..g).find(|&j| !row[j].is_zero()) {
            Some(p) => basis.push((p, row)),
            None if !row[g].is_zero() => return None,
            None => {}
        }
        if basis.len() == g {
            break;
        }
    }
    let mut sys = Matrix::zeros(basis.len(), g + 1);
    for (r, (_, row)) in basis.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            sys.set(r, j, v.clone());
        }
    }
    let pivots = rref(&mut sys);
    if pivots.contains(&g) {
        return None;
    }
    let mut coeffs = vec![BigRational::zero(); g];
    for (r, &pc) in pivots.iter().enumerate() {
        coeffs[pc] = sys.get(r, g).clone();
    }
    for i in scanned..len {
        let v = generators
            .iter()
            .zip(&coeffs)
            .filter(|(_, c)| !c.is_zero())
            .fold(BigRational::zero(), |acc, (gen, c)| acc + &gen[i] * c);
        if v != target[i] {
            return None;
        }
    }
    Some(coeffs)
}

impl LinearAlgebra for BigRational {
    fn rank_of(m: &Matrix<Self>, _tau: f64) -> Result<usize> {
        Ok(bareiss_rank(m))
    }

    fn kernel_of(m: &Matrix<Self>, _tau: f64) -> Result<Vec<Vec<Self>>> {
        Ok(exact_kernel(m))
    }

    fn solve_span(
        target: &[Self],
        generators: &[Vec<Self>],
        _tol: f64,
    ) -> Result<Option<Vec<Self>>> {
        Ok(exact_solve_span(target, generators))
    }
}

// ---------------------------------------------------------------- approx ---

fn to_dmatrix(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows, m.cols, &m.data)
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix<Complex64>) -> Result<Vec<f64>> {
    m.check_finite()?;
    if m.rows == 0 || m.cols == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = to_dmatrix(m).singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

fn numeric_rank(m: &Matrix<Complex64>, tau: f64) -> Result<usize> {
    let sv = singular_values(m)?;
    let Some(&top) = sv.first() else { return Ok(0) };
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tau * top).count())
}

fn numeric_kernel(m: &Matrix<Complex64>, tau: f64) -> Result<Vec<Vec<Complex64>>> {
    m.check_finite()?;
    let cols = m.cols;
    if cols == 0 {
        return Ok(Vec::new());
    }
    // pad to a square-or-tall matrix so the SVD returns a full right basis
    let rows = m.rows.max(cols);
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    for i in 0..m.rows {
        for j in 0..cols {
            a[(i, j)] = *m.get(i, j);
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| invalid("SVD did not converge"))?;
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if top == 0.0 || *s <= tau * top {
            out.push((0..cols).map(|j| v_t[(k, j)].conj()).collect());
        }
    }
    Ok(out)
}

fn numeric_solve_span(
    target: &[Complex64],
    generators: &[Vec<Complex64>],
    tol: f64,
) -> Result<Option<Vec<Complex64>>> {
    let t_norm = norm(target);
    if t_norm == 0.0 {
        return Ok(Some(vec![Complex64::zero(); generators.len()]));
    }
    if generators.is_empty() {
        return Ok(None);
    }
    let g = Matrix::from_columns(generators)?;
    let a = to_dmatrix(&g);
    let b = nalgebra::DVector::from_column_slice(target);
    let svd = a.svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&b, DEFAULT_RANK_TAU * top.max(f64::MIN_POSITIVE))
        .map_err(|e| invalid(format!("least squares failed: {e}")))?;
    let coeffs: Vec<Complex64> = x.iter().copied().collect();
    if !coeffs.iter().all(Scalar::is_finite) {
        return Err(invalid("non-finite least-squares solution"));
    }
    let resid: Vec<Complex64> = g
        .mul_vec(&coeffs)
        .iter()
        .zip(target)
        .map(|(a, b)| a - b)
        .collect();
    if norm(&resid) <= tol * t_norm {
        Ok(Some(coeffs))
    } else {
        Ok(None)
    }
}

impl LinearAlgebra for Complex64 {
    fn rank_of(m: &Matrix<Self>, tau: f64) -> Result<usize> {
        numeric_rank(m, tau)
    }

    fn kernel_of(m: &Matrix<Self>, tau: f64) -> Result<Vec<Vec<Self>>> {
        numeric_kernel(m, tau)
    }

    fn solve_span(
        target: &[Self],
        generators: &[Vec<Self>],
        tol: f64,
    ) -> Result<Option<Vec<Self>>> {
        numeric_solve_span(target, generators, tol)
    }
}

/// Greedy column selection: indices of a numerically independent subset
/// (modified Gram-Schmidt with re-orthogonalization).
pub fn independent_subset(vectors: &[Vec<Complex64>], tau: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut keep = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let n0 = norm(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= dot * bi;
                }
            }
        }
        let n = norm(&w);
        if n > tau.sqrt() * n0 {
            basis.push(w.iter().map(|x| x / n).collect());
            keep.push(idx);
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn q(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(mat_rank(&Matrix::<BigRational>::identity(3)).unwrap(), 3);
        assert_eq!(mat_rank(&Matrix::<BigRational>::zeros(3, 2)).unwrap(), 0);
        assert_eq!(mat_rank(&q(&[&[1, 2], &[2, 4], &[3, 6]])).unwrap(), 1);
        assert_eq!(
            mat_rank(&q(&[&[1, 2], &[2, 4], &[3, 6]]).to_complex()).unwrap(),
            1
        );
    }

    #[test]
    fn rank_with_fractions_and_skipped_columns() {
        let m = Matrix::from_rows(&[
            vec![int(0), rat(1, 2), int(1)],
            vec![int(0), rat(1, 3), rat(2, 3)],
            vec![int(0), int(0), int(5)],
        ])
        .unwrap();
        assert_eq!(mat_rank(&m).unwrap(), 2);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&Matrix::<BigRational>::identity(3))
            .unwrap()
            .is_empty());
        let k = kernel_basis(&q(&[&[1, -1]])).unwrap();
        assert_eq!(k, vec![vec![int(1), int(1)]]);
        let k = kernel_basis(&q(&[&[0, 1, 0], &[1, 0, 0]])).unwrap();
        assert_eq!(k, vec![vec![int(0), int(0), int(1)]]);
    }

    #[test]
    fn numeric_kernel_of_hankel() {
        let k = kernel_basis(&q(&[&[0, 1, 0], &[1, 0, 0]]).to_complex()).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k[0][0].norm() < 1e-12 && k[0][1].norm() < 1e-12);
        assert!((k[0][2].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn span_examples() {
        let gens = vec![
            vec![int(1), int(0), int(0), int(0)],
            vec![int(0), int(1), int(1), int(0)],
            vec![int(0), int(0), int(0), int(2)],
        ];
        let c = solve_in_span(&gens[0].clone(), &gens, 0.0)
            .unwrap()
            .unwrap();
        assert_eq!(c, vec![int(1), int(0), int(0)]);
        let c = solve_in_span(&vec![int(0); 4], &gens, 0.0)
            .unwrap()
            .unwrap();
        assert_eq!(c, vec![int(0); 3]);
        let c = solve_in_span(&[int(0), int(1), int(1), int(0)], &gens, 0.0)
            .unwrap()
            .unwrap();
        assert_eq!(c, vec![int(0), int(1), int(0)]);
        assert!(solve_in_span(&[int(0), int(1), int(0), int(0)], &gens, 0.0)
            .unwrap()
            .is_none());
        assert!(solve_in_span(&[int(0), int(1)], &gens, 0.0).is_err());
    }

    #[test]
    fn span_with_dependent_generators() {
        let gens = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        let c = solve_in_span(&[int(3), int(3)], &gens, 0.0)
            .unwrap()
            .unwrap();
        assert_eq!(linear_combination(&c, &gens, 2), vec![int(3), int(3)]);
        assert!(solve_in_span(&[int(3), int(4)], &gens, 0.0)
            .unwrap()
            .is_none());
    }

    #[test]
    fn numeric_span_and_non_finite() {
        let gens: Vec<Vec<Complex64>> = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 2.0)],
        ];
        let t = vec![Complex64::new(2.0, 1.0), Complex64::new(0.0, 2.0)];
        let c = solve_in_span(&t, &gens, 1e-10).unwrap().unwrap();
        assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let bad = vec![Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0)];
        assert!(solve_in_span(&bad, &gens, 1e-10).is_err());
        let m = Matrix::from_rows(&[bad]).unwrap();
        assert!(mat_rank(&m).is_err());
    }

    #[test]
    fn greedy_subset() {
        let v = |a: f64, b: f64| vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
        let idx = independent_subset(&[v(1.0, 0.0), v(2.0, 0.0), v(1.0, 1.0), v(0.0, 3.0)], 1e-10);
        assert_eq!(idx, vec![0, 2]);
    }
}
