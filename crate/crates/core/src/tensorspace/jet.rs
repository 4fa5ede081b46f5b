use num_rational::BigRational;
use num_traits::{One, Zero};

use super::format::{exponent_tuples, Format, ProductPoint};
use crate::error::{invalid, Result};
use crate::linalg::{bareiss_rank, solve_in_span, Matrix};
use crate::poly::{series_inv, series_mul, series_pow};
use crate::scalar::Scalar;

/// Truncated power series in the local parameter `t`, low order first.
pub type Series = Vec<BigRational>;

/// A connected curvilinear scheme of degree `order`, presented as the
/// order-`order` jet at `t = 0` of a parametrized map into the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct JetScheme {
    format: Format,
    order: usize,
    factors: Vec<Vec<Series>>,
}

/// Per-factor monomial series of one factor, then Kronecker-multiplied
/// across factors with truncation at `order`.
pub(crate) fn kron_series<T: Scalar>(
    weight: Vec<T>,
    parts: &[Vec<Vec<T>>],
    order: usize,
) -> Vec<Vec<T>> {
    let mut out = vec![weight];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for a in &out {
            for b in part {
                next.push(series_mul(a, b, order));
            }
        }
        out = next;
    }
    out
}

/// Degree-`d` monomials in the coordinate series of one factor.
pub(crate) fn monomial_series<T: Scalar>(coords: &[Vec<T>], d: usize, order: usize) -> Vec<Vec<T>> {
    let powers: Vec<Vec<Vec<T>>> = coords
        .iter()
        .map(|c| (0..=d).map(|e| series_pow(c, e, order)).collect())
        .collect();
    exponent_tuples(coords.len() - 1, d)
        .iter()
        .map(|alpha| {
            let mut acc = vec![T::zero(); order];
            if order > 0 {
                acc[0] = T::one();
            }
            for (j, &e) in alpha.iter().enumerate() {
                if e > 0 {
                    acc = series_mul(&acc, &powers[j][e], order);
                }
            }
            acc
        })
        .collect()
}

/// Transposes a list of per-coefficient series into per-order vectors.
pub(crate) fn series_to_vectors<T: Scalar>(series: Vec<Vec<T>>, order: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(series.len()); order];
    for s in series {
        for (m, v) in s.into_iter().enumerate().take(order) {
            out[m].push(v);
        }
    }
    out
}

fn pad(mut s: Series, order: usize) -> Result<Series> {
    if s.len() > order {
        if s[order..].iter().any(|c| !c.is_zero()) {
            return Err(invalid(format!(
                "jet coordinate has a nonzero term beyond order {order}"
            )));
        }
        s.truncate(order);
    }
    s.resize(order, BigRational::zero());
    Ok(s)
}

impl JetScheme {
    pub fn new(format: Format, order: usize, factors: Vec<Vec<Series>>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("jet order must be positive"));
        }
        if factors.len() != format.k() {
            return Err(invalid(format!(
                "jet has {} factors, format has {}",
                factors.len(),
                format.k()
            )));
        }
        let mut padded = Vec::with_capacity(factors.len());
        for (i, f) in factors.into_iter().enumerate() {
            if f.len() != format.dims()[i] + 1 {
                return Err(invalid(format!(
                    "jet factor {} has {} coordinates, expected {}",
                    i + 1,
                    f.len(),
                    format.dims()[i] + 1
                )));
            }
            let f: Vec<Series> = f
                .into_iter()
                .map(|s| pad(s, order))
                .collect::<Result<_>>()?;
            if f.iter().all(|s| s[0].is_zero()) {
                return Err(invalid(format!(
                    "jet factor {} has no unit coordinate at t = 0",
                    i + 1
                )));
            }
            padded.push(f);
        }
        Ok(JetScheme {
            format,
            order,
            factors: padded,
        })
    }

    /// Jet at parameter `u` of a polynomial map (per factor, per coordinate,
    /// low degree first), re-parametrized so the base point sits at `t = 0`.
    pub fn from_map_at(
        format: Format,
        order: usize,
        polys: &[Vec<Series>],
        u: &BigRational,
    ) -> Result<Self> {
        let shifted = polys
            .iter()
            .map(|f| {
                f.iter()
                    .map(|p| {
                        let mut q = taylor_shift(p, u);
                        q.truncate(order);
                        q
                    })
                    .collect()
            })
            .collect();
        JetScheme::new(format, order, shifted)
    }

    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn factors(&self) -> &[Vec<Series>] {
        &self.factors
    }

    pub fn support(&self) -> ProductPoint<BigRational> {
        ProductPoint {
            factors: self
                .factors
                .iter()
                .map(|f| f.iter().map(|s| s[0].clone()).collect())
                .collect(),
        }
    }

    /// The sub-jet of lower order (the unique degree-`order` sub-scheme).
    pub fn truncate(&self, order: usize) -> Result<JetScheme> {
        if order == 0 || order > self.order {
            return Err(invalid(format!(
                "cannot truncate an order-{} jet to order {order}",
                self.order
            )));
        }
        let factors = self
            .factors
            .iter()
            .map(|f| f.iter().map(|s| s[..order].to_vec()).collect())
            .collect();
        Ok(JetScheme {
            format: self.format.clone(),
            order,
            factors,
        })
    }

    /// `order` vectors spanning the linear span of the embedded scheme:
    /// vector `j` is the `t^j` Taylor coefficient of `t -> embed(f(t))`.
    pub fn jet_vectors(&self) -> Vec<Vec<BigRational>> {
        self.jet_vectors_weighted(&[BigRational::one()])
    }

    /// Jet vectors of `w(t) * embed(f(t))` for a scalar series `w`.
    pub fn jet_vectors_weighted(&self, weight: &[BigRational]) -> Vec<Vec<BigRational>> {
        let c = self.order;
        let mut w = weight.to_vec();
        w.resize(c, BigRational::zero());
        let parts: Vec<Vec<Series>> = self
            .factors
            .iter()
            .zip(self.format.degrees())
            .map(|(f, &d)| monomial_series(f, d, c))
            .collect();
        series_to_vectors(kron_series(w, &parts, c), c)
    }

    /// `pi_i`: the coordinate series of factor `i`.
    pub fn project_factor(&self, i: usize) -> Result<FactorJet> {
        self.format.check_factor(i)?;
        Ok(FactorJet {
            coords: self.factors[i].clone(),
            order: self.order,
        })
    }

    /// `tau_i`: the jet with factor `i` removed.
    pub fn drop_factor(&self, i: usize) -> Result<JetScheme> {
        self.format.check_factor(i)?;
        let format = self.format.without_factor(i)?;
        let mut factors = self.factors.clone();
        factors.remove(i);
        Ok(JetScheme {
            format,
            order: self.order,
            factors,
        })
    }

    pub fn local_degree(&self, i: usize) -> Result<usize> {
        Ok(self.project_factor(i)?.local_degree())
    }

    /// Rank of the vectors spanned by `pi_i` of the jet, i.e. `dim <pi_i(Gamma)> + 1`.
    pub fn factor_span_rank(&self, i: usize) -> Result<usize> {
        Ok(self.project_factor(i)?.span_rank())
    }

    /// Rank of the jet vectors; equals the order iff the embedded scheme is
    /// linearly independent.
    pub fn embedded_rank(&self) -> usize {
        let m = Matrix::from_columns(&self.jet_vectors()).expect("jet vectors share a length");
        bareiss_rank(&m)
    }
}

/// Taylor expansion of `p(t + u)`.
pub fn taylor_shift(p: &[BigRational], u: &BigRational) -> Series {
    let mut out = vec![BigRational::zero(); p.len()];
    // Horner in the shifted variable
    for c in p.iter().rev() {
        for j in (1..out.len()).rev() {
            out[j] = &out[j] * u + &out[j - 1];
        }
        out[0] = &out[0] * u + c;
    }
    out
}

/// The jet of a single factor, `pi_i(Gamma)`, as `n_i + 1` coordinate series.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorJet {
    pub coords: Vec<Series>,
    pub order: usize,
}

impl FactorJet {
    /// Index of the first coordinate that is a unit at `t = 0`.
    pub fn unit_coordinate(&self) -> Option<usize> {
        self.coords.iter().position(|s| !s[0].is_zero())
    }

    /// Affine coordinates `f_j / f_r` (all `j`), `r` the unit coordinate.
    pub fn affine(&self) -> Option<(usize, Vec<Series>)> {
        let r = self.unit_coordinate()?;
        let inv = series_inv(&self.coords[r], self.order)?;
        Some((
            r,
            self.coords
                .iter()
                .map(|s| series_mul(s, &inv, self.order))
                .collect(),
        ))
    }

    /// Length of the image scheme: dimension of the subalgebra of
    /// `K[t]/t^order` generated by the affine coordinates.
    pub fn local_degree(&self) -> usize {
        let Some((_, aff)) = self.affine() else {
            return 0;
        };
        let c = self.order;
        let gens: Vec<Series> = aff
            .into_iter()
            .map(|mut s| {
                s[0] = BigRational::zero();
                s
            })
            .filter(|s| s.iter().any(|x| !x.is_zero()))
            .collect();
        let mut one = vec![BigRational::zero(); c];
        one[0] = BigRational::one();
        let mut basis: Vec<Series> = Vec::new();
        let mut queue = vec![one];
        while let Some(v) = queue.pop() {
            if v.iter().all(Zero::is_zero) {
                continue;
            }
            let independent = basis.is_empty()
                || solve_in_span(&v, &basis, 0.0)
                    .expect("equal lengths")
                    .is_none();
            if independent {
                for g in &gens {
                    queue.push(series_mul(&v, g, c));
                }
                basis.push(v);
            }
        }
        basis.len()
    }

    pub fn span_rank(&self) -> usize {
        let m = Matrix::from_columns(&self.taylor_vectors()).expect("uniform coordinate count");
        bareiss_rank(&m)
    }

    /// Taylor coefficient vectors `f_0, f_1, ...` of the lift.
    pub fn taylor_vectors(&self) -> Vec<Vec<BigRational>> {
        (0..self.order)
            .map(|m| self.coords.iter().map(|s| s[m].clone()).collect())
            .collect()
    }
}

/// Disjoint union of connected jets in a common format.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiJet {
    components: Vec<JetScheme>,
}

impl MultiJet {
    pub fn new(components: Vec<JetScheme>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid("multi-jet needs at least one component"));
        };
        if components.iter().any(|c| c.format() != first.format()) {
            return Err(invalid("multi-jet components use different formats"));
        }
        for a in 0..components.len() {
            for b in a + 1..components.len() {
                if components[a]
                    .support()
                    .projectively_eq(&components[b].support(), 0.0)
                {
                    return Err(invalid(format!(
                        "components {} and {} share a support point",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(MultiJet { components })
    }

    pub fn components(&self) -> &[JetScheme] {
        &self.components
    }

    pub fn format(&self) -> &Format {
        self.components[0].format()
    }

    /// Total degree `c`.
    pub fn degree(&self) -> usize {
        self.components.iter().map(JetScheme::order).sum()
    }

    /// Number of connected components `alpha`.
    pub fn alpha(&self) -> usize {
        self.components.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn s(v: &[i64]) -> Series {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn order_one_is_the_support() {
        let f = Format::new(vec![1, 1], vec![1, 2]).unwrap();
        let z = JetScheme::new(
            f.clone(),
            1,
            vec![vec![s(&[1]), s(&[2])], vec![s(&[3]), s(&[1])]],
        )
        .unwrap();
        let v = z.jet_vectors();
        assert_eq!(v.len(), 1);
        assert_eq!(
            v[0],
            super::super::format::embed(&f, &z.support())
                .unwrap()
                .coeffs
        );
    }

    #[test]
    fn diagonal_jet_vectors() {
        let f = Format::segre_p1(2).unwrap();
        let z = JetScheme::new(
            f,
            3,
            vec![vec![s(&[1]), s(&[0, 1])], vec![s(&[1]), s(&[0, 1])]],
        )
        .unwrap();
        assert_eq!(
            z.jet_vectors(),
            vec![s(&[1, 0, 0, 0]), s(&[0, 1, 1, 0]), s(&[0, 0, 0, 1])]
        );
    }

    #[test]
    fn cubic_line_jet() {
        let f = Format::new(vec![1], vec![3]).unwrap();
        let z = JetScheme::new(f, 2, vec![vec![s(&[1]), s(&[0, 1])]]).unwrap();
        assert_eq!(z.jet_vectors(), vec![s(&[1, 0, 0, 0]), s(&[0, 1, 0, 0])]);
    }

    #[test]
    fn local_degrees() {
        let f = Format::segre_p1(2).unwrap();
        let z = JetScheme::new(
            f.clone(),
            3,
            vec![vec![s(&[1]), s(&[0, 0, 1])], vec![s(&[1]), s(&[0, 1])]],
        )
        .unwrap();
        assert_eq!(z.local_degree(0).unwrap(), 2);
        assert_eq!(z.local_degree(1).unwrap(), 3);
        assert_eq!(
            z.project_factor(1).unwrap().coords,
            vec![s(&[1, 0, 0]), s(&[0, 1, 0])]
        );
        // constant projectively: (1+t, 2+2t)
        let c = JetScheme::new(
            f,
            3,
            vec![vec![s(&[1, 1]), s(&[2, 2])], vec![s(&[1]), s(&[0, 1])]],
        )
        .unwrap();
        assert_eq!(c.local_degree(0).unwrap(), 1);
        assert_eq!(c.factor_span_rank(0).unwrap(), 1);
        assert!(c.local_degree(2).is_err());
    }

    #[test]
    fn cusp_has_full_length() {
        // (1, t^2, t^3) mod t^4 generates {1, t^2, t^3}
        let f = Format::new(vec![2], vec![1]).unwrap();
        let z = JetScheme::new(f, 4, vec![vec![s(&[1]), s(&[0, 0, 1]), s(&[0, 0, 0, 1])]]).unwrap();
        assert_eq!(z.local_degree(0).unwrap(), 3);
    }

    #[test]
    fn shift_to_origin() {
        // t^2 expanded at u = 1 is 1 + 2t + t^2
        assert_eq!(taylor_shift(&s(&[0, 0, 1]), &int(1)), s(&[1, 2, 1]));
        let f = Format::new(vec![1], vec![1]).unwrap();
        let z = JetScheme::from_map_at(f, 2, &[vec![s(&[1]), s(&[0, 0, 1])]], &int(1)).unwrap();
        assert_eq!(z.factors()[0][1], s(&[1, 2]));
    }

    #[test]
    fn rejects_bad_jets() {
        let f = Format::new(vec![1], vec![1]).unwrap();
        assert!(JetScheme::new(f.clone(), 2, vec![vec![s(&[0, 1]), s(&[0, 0])]]).is_err());
        assert!(JetScheme::new(f.clone(), 2, vec![vec![s(&[1, 0, 1]), s(&[0])]]).is_err());
        assert!(JetScheme::new(f, 0, vec![vec![s(&[1]), s(&[0])]]).is_err());
    }

    #[test]
    fn multijet_requires_distinct_supports() {
        let f = Format::new(vec![1], vec![2]).unwrap();
        let a = JetScheme::new(f.clone(), 2, vec![vec![s(&[1]), s(&[0, 1])]]).unwrap();
        let b = JetScheme::new(f.clone(), 1, vec![vec![s(&[2]), s(&[0])]]).unwrap();
        assert!(MultiJet::new(vec![a.clone(), b]).is_err());
        let c = JetScheme::new(f, 1, vec![vec![s(&[0]), s(&[1])]]).unwrap();
        let m = MultiJet::new(vec![a, c]).unwrap();
        assert_eq!((m.degree(), m.alpha()), (3, 2));
    }
}
