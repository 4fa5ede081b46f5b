use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::format::{embed, Format, PSTensor, ProductPoint};
use crate::error::{invalid, Error, Result};
use crate::scalar::{norm, Scalar};

/// Default relative residual accepted by numeric verification.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

/// Relative distance at which approximate points are treated as equal.
pub const MERGE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[default]
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub coeff: T,
    pub point: ProductPoint<T>,
}

/// `p = sum coeff_i * embed(point_i)`; the term count is the size.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<T> {
    pub format: Format,
    pub terms: Vec<Term<T>>,
}

impl<T: Scalar> Decomposition<T> {
    /// Builds a decomposition, dropping zero coefficients and merging
    /// projectively equal points.
    pub fn new(format: Format, terms: Vec<Term<T>>) -> Result<Self> {
        for t in &terms {
            t.point.check_format(&format)?;
        }
        let mut d = Decomposition { format, terms };
        d.normalize(MERGE_TOL);
        if d.terms.is_empty() {
            return Err(invalid("decomposition has no nonzero terms"));
        }
        Ok(d)
    }

    pub fn size(&self) -> usize {
        self.terms.len()
    }

    /// Merges projectively equal points (coefficients rescaled onto the
    /// first representative) and drops zero terms.
    pub fn normalize(&mut self, tol: f64) {
        let mut merged: Vec<Term<T>> = Vec::new();
        for t in self.terms.drain(..) {
            if let Some(m) = merged
                .iter_mut()
                .find(|m| m.point.projectively_eq(&t.point, tol))
            {
                let ratio = scale_between(&m.point, &t.point, &self.format);
                m.coeff = m.coeff.clone() + t.coeff * ratio;
            } else {
                merged.push(t);
            }
        }
        let zero_tol = if T::EXACT { 0.0 } else { 1e-14 };
        let scale = merged
            .iter()
            .map(|t| t.coeff.magnitude())
            .fold(0.0, f64::max);
        merged.retain(|t| !t.coeff.is_zero() && t.coeff.magnitude() > zero_tol * scale);
        self.terms = merged;
    }

    /// `sum coeff_i embed(x_i)` as a coefficient vector.
    pub fn evaluate(&self) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.format.len()];
        for t in &self.terms {
            let e = embed(&self.format, &t.point)?;
            for (o, v) in out.iter_mut().zip(e.coeffs) {
                *o = o.clone() + t.coeff.clone() * v;
            }
        }
        Ok(out)
    }

    pub fn to_complex(&self) -> Decomposition<Complex64> {
        Decomposition {
            format: self.format.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.to_complex(),
                    point: t.point.to_complex(),
                })
                .collect(),
        }
    }

    pub fn points(&self) -> Vec<ProductPoint<T>> {
        self.terms.iter().map(|t| t.point.clone()).collect()
    }
}

/// Scalar `r` with `embed(b) = r * embed(a)` for projectively equal points.
fn scale_between<T: Scalar>(a: &ProductPoint<T>, b: &ProductPoint<T>, format: &Format) -> T {
    let mut r = T::one();
    for ((fa, fb), &d) in a.factors.iter().zip(&b.factors).zip(format.degrees()) {
        let j = (0..fa.len())
            .max_by(|&x, &y| fa[x].magnitude().total_cmp(&fa[y].magnitude()))
            .expect("nonempty factor");
        let ratio = fb[j].clone() / fa[j].clone();
        for _ in 0..d {
            r = r * ratio.clone();
        }
    }
    r
}

/// Either field, tagged.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDecomposition {
    Exact(Decomposition<BigRational>),
    Approx(Decomposition<Complex64>),
}

impl AnyDecomposition {
    pub fn size(&self) -> usize {
        match self {
            AnyDecomposition::Exact(d) => d.size(),
            AnyDecomposition::Approx(d) => d.size(),
        }
    }

    pub fn format(&self) -> &Format {
        match self {
            AnyDecomposition::Exact(d) => &d.format,
            AnyDecomposition::Approx(d) => &d.format,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyDecomposition::Exact(_))
    }

    pub fn to_complex(&self) -> Decomposition<Complex64> {
        match self {
            AnyDecomposition::Exact(d) => d.to_complex(),
            AnyDecomposition::Approx(d) => d.clone(),
        }
    }
}

/// Outcome of a successful verification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub size: usize,
    pub mode: Mode,
    pub residual: f64,
}

/// Relative residual of `sum` against `p` after the best projective rescaling.
pub fn projective_residual(p: &[Complex64], sum: &[Complex64]) -> f64 {
    let pp: f64 = p.iter().map(|x| x.norm_sqr()).sum();
    if pp == 0.0 {
        return if norm(sum) == 0.0 { 0.0 } else { 1.0 };
    }
    let mu: Complex64 = p
        .iter()
        .zip(sum)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        / pp;
    if mu.norm() == 0.0 {
        return 1.0;
    }
    let diff: Vec<Complex64> = sum.iter().zip(p).map(|(s, x)| s - mu * x).collect();
    norm(&diff) / (mu.norm() * pp.sqrt())
}

fn exact_projective_match(p: &[BigRational], sum: &[BigRational]) -> bool {
    let Some(i) = p.iter().position(|x| !x.is_zero()) else {
        return sum.iter().all(Zero::is_zero);
    };
    let mu = &sum[i] / &p[i];
    !mu.is_zero() && p.iter().zip(sum).all(|(a, b)| &mu * a == *b)
}

/// Checks `p` against `sum coeff_i embed(x_i)` projectively.
pub fn verify_decomposition(
    p: &PSTensor<BigRational>,
    dec: &AnyDecomposition,
    mode: Mode,
    tol: f64,
) -> Result<VerificationRecord> {
    if dec.format() != &p.format {
        return Err(invalid("decomposition and tensor formats differ"));
    }
    match (mode, dec) {
        (Mode::Exact, AnyDecomposition::Exact(d)) => {
            let sum = d.evaluate()?;
            if exact_projective_match(&p.coeffs, &sum) {
                Ok(VerificationRecord {
                    size: d.size(),
                    mode,
                    residual: 0.0,
                })
            } else {
                let residual = projective_residual(
                    &crate::scalar::to_complex_vec(&p.coeffs),
                    &crate::scalar::to_complex_vec(&sum),
                );
                Err(Error::VerificationFailed { residual, tol: 0.0 })
            }
        }
        (Mode::Exact, AnyDecomposition::Approx(_)) => Err(invalid(
            "exact verification requested for an approximate decomposition",
        )),
        (Mode::Numeric, _) => verify_numeric(&p.to_complex(), &dec.to_complex(), tol),
    }
}

pub fn verify_numeric(
    p: &PSTensor<Complex64>,
    dec: &Decomposition<Complex64>,
    tol: f64,
) -> Result<VerificationRecord> {
    let sum = dec.evaluate()?;
    let residual = projective_residual(&p.coeffs, &sum);
    if !residual.is_finite() || residual > tol {
        return Err(Error::VerificationFailed { residual, tol });
    }
    Ok(VerificationRecord {
        size: dec.size(),
        mode: Mode::Numeric,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn pt(f: &[&[i64]]) -> ProductPoint<BigRational> {
        ProductPoint::new(
            f.iter()
                .map(|v| v.iter().map(|&x| int(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_point_passes() {
        let f = Format::segre_p1(2).unwrap();
        let x = pt(&[&[1, 2], &[3, 1]]);
        let p = embed(&f, &x).unwrap();
        let dec = Decomposition::new(
            f,
            vec![Term {
                coeff: int(1),
                point: x,
            }],
        )
        .unwrap();
        let rec = verify_decomposition(&p, &AnyDecomposition::Exact(dec.clone()), Mode::Exact, 0.0)
            .unwrap();
        assert_eq!((rec.size, rec.residual), (1, 0.0));
        let rec =
            verify_decomposition(&p, &AnyDecomposition::Exact(dec), Mode::Numeric, 1e-12).unwrap();
        assert!(rec.residual < 1e-15);
    }

    #[test]
    fn merges_equal_points() {
        let f = Format::new(vec![1], vec![2]).unwrap();
        let terms = vec![
            Term {
                coeff: int(1),
                point: pt(&[&[1, 1]]),
            },
            Term {
                coeff: int(1),
                point: pt(&[&[2, 2]]),
            },
            Term {
                coeff: int(0),
                point: pt(&[&[1, 0]]),
            },
        ];
        let d = Decomposition::new(f.clone(), terms).unwrap();
        assert_eq!(d.size(), 1);
        assert_eq!(d.terms[0].coeff, int(5));
        assert_eq!(
            d.evaluate().unwrap(),
            embed(&f, &pt(&[&[1, 1]]))
                .unwrap()
                .coeffs
                .iter()
                .map(|c| c * int(5))
                .collect::<Vec<_>>()
        );
        assert!(Decomposition::new(
            f,
            vec![Term {
                coeff: int(0),
                point: pt(&[&[1, 0]])
            }]
        )
        .is_err());
    }

    #[test]
    fn perturbed_coefficient_fails() {
        let f = Format::segre_p1(3).unwrap();
        let a = pt(&[&[1, 0], &[1, 0], &[1, 1]]);
        let b = pt(&[&[1, 0], &[0, 1], &[1, 0]]);
        let c = pt(&[&[0, 1], &[1, 0], &[1, 0]]);
        let terms = |eps: BigRational| {
            vec![
                Term {
                    coeff: int(1) + eps,
                    point: a.clone(),
                },
                Term {
                    coeff: int(1),
                    point: b.clone(),
                },
                Term {
                    coeff: int(1),
                    point: c.clone(),
                },
            ]
        };
        let good = Decomposition::new(f.clone(), terms(int(0))).unwrap();
        let p = PSTensor::new(f.clone(), good.evaluate().unwrap()).unwrap();
        let bad = AnyDecomposition::Exact(Decomposition::new(f, terms(rat(1, 1000))).unwrap());
        match verify_decomposition(&p, &bad, Mode::Numeric, 1e-8) {
            Err(Error::VerificationFailed { residual, .. }) => assert!(residual > 1e-5),
            other => panic!("expected failure, got {other:?}"),
        }
        assert!(verify_decomposition(&p, &bad, Mode::Exact, 0.0).is_err());
    }
}
