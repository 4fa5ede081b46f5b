use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Shape `(k; n_1..n_k; d_1..d_k)` of a partially symmetric tensor space
/// `S^{d_1} V_1 (x) ... (x) S^{d_k} V_k` with `dim V_i = n_i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FormatWire", into = "FormatWire")]
pub struct Format {
    n: Vec<usize>,
    d: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct FormatWire {
    k: usize,
    n: Vec<usize>,
    d: Vec<usize>,
}

impl TryFrom<FormatWire> for Format {
    type Error = crate::error::Error;

    fn try_from(w: FormatWire) -> Result<Self> {
        if w.k != w.n.len() || w.k != w.d.len() {
            return Err(invalid(format!(
                "format declares k={} but lists {} dims and {} degrees",
                w.k,
                w.n.len(),
                w.d.len()
            )));
        }
        Format::new(w.n, w.d)
    }
}

impl From<Format> for FormatWire {
    fn from(f: Format) -> Self {
        FormatWire {
            k: f.k(),
            n: f.n,
            d: f.d,
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent vectors of length `n + 1` summing to `d`, lexicographically descending.
pub fn exponent_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, len: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == len {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(pos + 1, len, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(d + n, n));
    rec(0, n + 1, d, &mut Vec::with_capacity(n + 1), &mut out);
    out
}

/// Exponent tuples of one factor together with their reverse lookup.
#[derive(Debug, Clone)]
pub struct FactorIndex {
    pub tuples: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl FactorIndex {
    pub fn new(n: usize, d: usize) -> Self {
        let tuples = exponent_tuples(n, d);
        let lookup = tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        FactorIndex { tuples, lookup }
    }

    pub fn position(&self, exps: &[usize]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

impl Format {
    pub fn new(n: Vec<usize>, d: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(invalid("format needs at least one factor"));
        }
        if n.len() != d.len() {
            return Err(invalid("dims and degrees differ in length"));
        }
        if n.contains(&0) || d.contains(&0) {
            return Err(invalid("every n_i and d_i must be at least 1"));
        }
        Ok(Format { n, d })
    }

    /// Segre format `(P^1)^k` with all degrees 1.
    pub fn segre_p1(k: usize) -> Result<Self> {
        Format::new(vec![1; k], vec![1; k])
    }

    pub fn k(&self) -> usize {
        self.n.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.n
    }

    pub fn degrees(&self) -> &[usize] {
        &self.d
    }

    pub fn factor_len(&self, i: usize) -> usize {
        binomial(self.d[i] + self.n[i], self.n[i])
    }

    /// Number of coefficients, `N + 1`.
    pub fn len(&self) -> usize {
        (0..self.k()).map(|i| self.factor_len(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Projective dimension `N` of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.len() - 1
    }

    /// `M = prod(n_i + 1) - 1` when every degree is 1.
    pub fn segre_dim(&self) -> Option<usize> {
        self.d
            .iter()
            .all(|&d| d == 1)
            .then(|| self.n.iter().map(|&n| n + 1).product::<usize>() - 1)
    }

    pub fn degree_sum(&self) -> usize {
        self.d.iter().sum()
    }

    pub fn factor_indices(&self) -> Vec<FactorIndex> {
        (0..self.k())
            .map(|i| FactorIndex::new(self.n[i], self.d[i]))
            .collect()
    }

    /// Global coefficient index of per-factor positions (factor 1 most significant).
    pub fn global_index(&self, positions: &[usize]) -> usize {
        positions
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &p)| acc * self.factor_len(i) + p)
    }

    pub fn without_factor(&self, i: usize) -> Result<Format> {
        if self.k() == 1 {
            return Err(invalid("cannot drop the only factor"));
        }
        let mut n = self.n.clone();
        let mut d = self.d.clone();
        n.remove(i);
        d.remove(i);
        Format::new(n, d)
    }

    pub fn with_dims(&self, n: Vec<usize>) -> Result<Format> {
        Format::new(n, self.d.clone())
    }

    pub fn check_factor(&self, i: usize) -> Result<()> {
        if i >= self.k() {
            return Err(invalid(format!(
                "factor index {} out of range 1..={}",
                i + 1,
                self.k()
            )));
        }
        Ok(())
    }
}

/// Per-factor nonnegative integer tuple, e.g. the multidegree of a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiDegree(pub Vec<usize>);

impl MultiDegree {
    /// The tuple with a single 1 at slot `i`.
    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![0; k];
        v[i] = 1;
        MultiDegree(v)
    }

    /// Degree of the embedded curve, `sum a_i d_i`.
    pub fn embedded_degree(&self, format: &Format) -> usize {
        self.0
            .iter()
            .zip(format.degrees())
            .map(|(a, d)| a * d)
            .sum()
    }
}

/// A point of `P^{n_1} x ... x P^{n_k}` given by homogeneous coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint<T> {
    pub factors: Vec<Vec<T>>,
}

impl<T: Scalar> ProductPoint<T> {
    pub fn new(factors: Vec<Vec<T>>) -> Result<Self> {
        if factors.iter().any(|f| f.iter().all(|x| x.is_zero())) {
            return Err(invalid("product point has a zero factor"));
        }
        Ok(ProductPoint { factors })
    }

    pub fn check_format(&self, format: &Format) -> Result<()> {
        if self.factors.len() != format.k() {
            return Err(invalid(format!(
                "point has {} factors, format has {}",
                self.factors.len(),
                format.k()
            )));
        }
        for (i, f) in self.factors.iter().enumerate() {
            if f.len() != format.dims()[i] + 1 {
                return Err(invalid(format!(
                    "factor {} has {} coordinates, expected {}",
                    i + 1,
                    f.len(),
                    format.dims()[i] + 1
                )));
            }
            if f.iter().all(|x| x.is_zero()) {
                return Err(invalid(format!("factor {} is the zero vector", i + 1)));
            }
        }
        Ok(())
    }

    pub fn to_complex(&self) -> ProductPoint<num_complex::Complex64> {
        ProductPoint {
            factors: self
                .factors
                .iter()
                .map(|f| crate::scalar::to_complex_vec(f))
                .collect(),
        }
    }

    /// Projective equality factor by factor; `tol` is a relative threshold
    /// on 2x2 minors and ignored for exact scalars.
    pub fn projectively_eq(&self, other: &Self, tol: f64) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| proportional(a, b, tol))
    }

    /// The i-th factor (`pi_i`).
    pub fn project_factor(&self, i: usize) -> Result<Vec<T>> {
        self.factors
            .get(i)
            .cloned()
            .ok_or_else(|| invalid(format!("factor index {} out of range", i + 1)))
    }

    /// The point with factor `i` removed (`tau_i`).
    pub fn drop_factor(&self, i: usize) -> Result<Self> {
        if i >= self.factors.len() || self.factors.len() == 1 {
            return Err(invalid(format!("cannot drop factor {}", i + 1)));
        }
        let mut f = self.factors.clone();
        f.remove(i);
        Ok(ProductPoint { factors: f })
    }
}

/// Whether two vectors are parallel (and both nonzero).
pub fn proportional<T: Scalar>(a: &[T], b: &[T], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if T::EXACT {
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                if a[i].clone() * b[j].clone() != a[j].clone() * b[i].clone() {
                    return false;
                }
            }
        }
        return a.iter().any(|x| !x.is_zero()) && b.iter().any(|x| !x.is_zero());
    }
    let na = crate::scalar::norm(a);
    let nb = crate::scalar::norm(b);
    if na == 0.0 || nb == 0.0 {
        return false;
    }
    let ac: Vec<_> = a.iter().map(|x| x.to_complex() / na).collect();
    let bc: Vec<_> = b.iter().map(|x| x.to_complex() / nb).collect();
    let mut worst: f64 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            worst = worst.max((ac[i] * bc[j] - ac[j] * bc[i]).norm());
        }
    }
    worst <= tol
}

/// Dense coefficient vector of a point of `P^N`, in the global index order.
#[derive(Debug, Clone, PartialEq)]
pub struct PSTensor<T> {
    pub format: Format,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> PSTensor<T> {
    pub fn new(format: Format, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != format.len() {
            return Err(invalid(format!(
                "tensor has {} coefficients, format needs {}",
                coeffs.len(),
                format.len()
            )));
        }
        if !coeffs.iter().all(Scalar::is_finite) {
            return Err(invalid("non-finite tensor coefficient"));
        }
        Ok(PSTensor { format, coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn to_complex(&self) -> PSTensor<num_complex::Complex64> {
        PSTensor {
            format: self.format.clone(),
            coeffs: crate::scalar::to_complex_vec(&self.coeffs),
        }
    }
}

/// Values of all degree-`d` monomials (in [`exponent_tuples`] order) at `x`.
pub fn monomials<T: Scalar>(x: &[T], d: usize) -> Vec<T> {
    let powers: Vec<Vec<T>> = x
        .iter()
        .map(|xi| {
            let mut p = Vec::with_capacity(d + 1);
            p.push(T::one());
            for e in 1..=d {
                p.push(p[e - 1].clone() * xi.clone());
            }
            p
        })
        .collect();
    exponent_tuples(x.len() - 1, d)
        .iter()
        .map(|alpha| {
            alpha
                .iter()
                .enumerate()
                .fold(T::one(), |acc, (j, &e)| acc * powers[j][e].clone())
        })
        .collect()
}

/// Kronecker product of per-factor vectors, factor 1 most significant.
pub fn kron_all<T: Scalar>(parts: &[Vec<T>]) -> Vec<T> {
    let mut out = vec![T::one()];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for a in &out {
            for b in part {
                next.push(a.clone() * b.clone());
            }
        }
        out = next;
    }
    out
}

/// The Segre-Veronese embedding with the pure monomial convention.
pub fn embed<T: Scalar>(format: &Format, x: &ProductPoint<T>) -> Result<PSTensor<T>> {
    x.check_format(format)?;
    let parts: Vec<Vec<T>> = x
        .factors
        .iter()
        .zip(format.degrees())
        .map(|(f, &d)| monomials(f, d))
        .collect();
    PSTensor::new(format.clone(), kron_all(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use num_rational::BigRational;

    fn pt(f: &[&[i64]]) -> ProductPoint<BigRational> {
        ProductPoint::new(
            f.iter()
                .map(|v| v.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dimensions() {
        let f = Format::new(vec![1, 1], vec![2, 1]).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(f.ambient_dim(), 5);
        assert_eq!(Format::segre_p1(3).unwrap().segre_dim(), Some(7));
        assert!(f.segre_dim().is_none());
        assert!(Format::new(vec![0], vec![1]).is_err());
        assert!(Format::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn lex_descending_order() {
        assert_eq!(
            exponent_tuples(1, 2),
            vec![vec![2, 0], vec![1, 1], vec![0, 2]]
        );
        assert_eq!(
            exponent_tuples(2, 1),
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
        assert_eq!(exponent_tuples(2, 3).len(), 10);
    }

    #[test]
    fn embed_examples() {
        let f = Format::new(vec![1], vec![2]).unwrap();
        assert_eq!(
            embed(&f, &pt(&[&[1, 2]])).unwrap().coeffs,
            vec![int(1), int(2), int(4)]
        );
        let s = Format::segre_p1(2).unwrap();
        let e = embed(&s, &pt(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(e.coeffs, vec![int(0), int(1), int(0), int(0)]);
        assert_eq!(s.global_index(&[0, 1]), 1);
        assert!(embed(&s, &pt(&[&[1, 0]])).is_err());
    }

    #[test]
    fn projective_equality() {
        assert!(pt(&[&[1, 2], &[3, 1]]).projectively_eq(&pt(&[&[2, 4], &[-3, -1]]), 0.0));
        assert!(!pt(&[&[1, 2], &[3, 1]]).projectively_eq(&pt(&[&[1, 2], &[1, 3]]), 0.0));
        let a = pt(&[&[1, 2]]).to_complex();
        let mut b = a.clone();
        b.factors[0][1] += num_complex::Complex64::new(1e-12, 0.0);
        assert!(a.projectively_eq(&b, 1e-9));
    }

    #[test]
    fn project_and_drop() {
        let x = pt(&[&[1, 2], &[3, 4], &[5, 6]]);
        assert_eq!(x.project_factor(1).unwrap(), vec![int(3), int(4)]);
        assert_eq!(x.drop_factor(0).unwrap(), pt(&[&[3, 4], &[5, 6]]));
        assert!(x.project_factor(3).is_err());
    }

    #[test]
    fn format_json_checks_k() {
        let f: Format = serde_json::from_str(r#"{"k":2,"n":[1,2],"d":[1,3]}"#).unwrap();
        assert_eq!(f.len(), 2 * 10);
        assert!(serde_json::from_str::<Format>(r#"{"k":3,"n":[1,2],"d":[1,3]}"#).is_err());
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"k":2,"n":[1,2],"d":[1,3]}"#
        );
    }
}
