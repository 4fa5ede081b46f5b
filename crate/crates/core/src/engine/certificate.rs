use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::format_rational;
use crate::tensorspace::{
    flattening_report_with, verify_decomposition, AnyDecomposition, Decomposition,
    FlatteningOptions, Format, Mode, PSTensor, Term,
};

/// Upper bound on the rank of any point of the third secant variety.
pub fn bound_sigma3(format: &Format) -> usize {
    2 * format.degree_sum() - 1
}

/// Upper bound for points in the span of a curvilinear scheme of degree `c`
/// with `alpha` components. `None` for `c < alpha` or `alpha = 0`.
pub fn bound_curvilinear(format: &Format, c: usize, alpha: usize) -> Option<usize> {
    if alpha == 0 || c < alpha {
        return None;
    }
    Some(2 * alpha + c * (format.degree_sum() - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    BoundExceeded,
}

/// Rank information: `lower` from flattenings, `upper` from the
/// decomposition. `exact` is set when they meet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankClaim {
    pub lower: usize,
    pub upper: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub digest: String,
    pub route: String,
    pub bound: usize,
    pub size: usize,
    pub mode: Mode,
    pub residual: f64,
    pub flattening_max_rank: Option<usize>,
    pub flattening_partial: bool,
    pub seed: u64,
    pub status: Status,
    pub fallback: bool,
    pub rank: RankClaim,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub border_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substitution_exponent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<f64>,
}

/// Hex SHA-256 of the format and the coefficient strings of `p`.
pub fn tensor_digest(p: &PSTensor<BigRational>) -> String {
    let mut h = Sha256::new();
    let f = &p.format;
    h.update(format!("n={:?};d={:?};", f.dims(), f.degrees()).as_bytes());
    for c in &p.coeffs {
        h.update(format_rational(c).as_bytes());
        h.update(b",");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Options shared by the engine pipelines.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub seed: u64,
    pub retries: usize,
    /// Relative residual accepted by numeric verification.
    pub tol: f64,
    pub flattening: FlatteningOptions,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            seed: 0,
            retries: crate::curves::DEFAULT_RETRIES,
            tol: crate::tensorspace::DEFAULT_VERIFY_TOL,
            flattening: FlatteningOptions::default(),
        }
    }
}

impl EngineOptions {
    pub(crate) fn sylvester(&self) -> crate::sylvester::SylvesterOptions {
        crate::sylvester::SylvesterOptions {
            seed: self.seed,
            retries: self.retries,
            tol: self.tol * 0.1,
        }
    }
}

/// Decomposition plus its certificate.
#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub decomposition: AnyDecomposition,
    pub certificate: Certificate,
}

/// Collects exact and approximate terms; stays exact while every term is.
#[derive(Debug, Clone, Default)]
pub(crate) struct TermCollector {
    exact: Vec<Term<BigRational>>,
    approx: Vec<Term<Complex64>>,
}

impl TermCollector {
    pub fn push_exact(&mut self, t: Term<BigRational>) {
        if !t.coeff.is_zero() {
            self.exact.push(t);
        }
    }

    pub fn extend_any(&mut self, d: AnyDecomposition) {
        match d {
            AnyDecomposition::Exact(d) => d.terms.into_iter().for_each(|t| self.push_exact(t)),
            AnyDecomposition::Approx(d) => self.approx.extend(d.terms),
        }
    }

    pub fn extend_approx(&mut self, d: Decomposition<Complex64>) {
        self.approx.extend(d.terms);
    }

    pub fn finish(self, format: &Format) -> Result<AnyDecomposition> {
        if self.approx.is_empty() {
            return Ok(AnyDecomposition::Exact(Decomposition::new(
                format.clone(),
                self.exact,
            )?));
        }
        let mut terms: Vec<Term<Complex64>> = self
            .exact
            .iter()
            .map(|t| Term {
                coeff: crate::scalar::Scalar::to_complex(&t.coeff),
                point: t.point.to_complex(),
            })
            .collect();
        terms.extend(self.approx);
        Ok(AnyDecomposition::Approx(Decomposition::new(
            format.clone(),
            terms,
        )?))
    }
}

/// Verifies `dec` against `p`, attaches flattening ranks and the bound check.
pub fn certify(
    p: &PSTensor<BigRational>,
    dec: AnyDecomposition,
    route: &str,
    bound: usize,
    fallback: bool,
    opts: &EngineOptions,
) -> Result<EngineOutput> {
    let mode = if dec.is_exact() {
        Mode::Exact
    } else {
        Mode::Numeric
    };
    let rec = verify_decomposition(p, &dec, mode, opts.tol)?;
    let (flat_max, partial) = match flattening_report_with(p, &opts.flattening) {
        Ok(r) => (Some(r.max_rank), r.partial),
        Err(Error::CapExceeded { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    let lower = flat_max.unwrap_or(1);
    let size = dec.size();
    let certificate = Certificate {
        digest: tensor_digest(p),
        route: route.to_string(),
        bound,
        size,
        mode,
        residual: rec.residual,
        flattening_max_rank: flat_max,
        flattening_partial: partial,
        seed: opts.seed,
        status: if size <= bound {
            Status::Ok
        } else {
            Status::BoundExceeded
        },
        fallback,
        rank: RankClaim {
            lower,
            upper: size,
            exact: (lower == size).then_some(size),
            note: None,
        },
        border_slope: None,
        substitution_exponent: None,
        timings_ms: None,
    };
    Ok(EngineOutput {
        decomposition: dec,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert_eq!(bound_sigma3(&Format::segre_p1(3).unwrap()), 5);
        assert_eq!(bound_sigma3(&Format::new(vec![2], vec![3]).unwrap()), 5);
        assert_eq!(
            bound_sigma3(&Format::new(vec![1, 1, 1], vec![2, 1, 3]).unwrap()),
            11
        );
        let f = Format::segre_p1(3).unwrap();
        assert_eq!(bound_curvilinear(&f, 3, 1), Some(8));
        assert_eq!(
            bound_curvilinear(&Format::segre_p1(2).unwrap(), 4, 2),
            Some(8)
        );
        assert_eq!(bound_curvilinear(&f, 1, 2), None);
        // c = 1: a point, rank 1 within the bound
        assert!(bound_curvilinear(&Format::new(vec![1], vec![1]).unwrap(), 1, 1).unwrap() >= 1);
    }

    #[test]
    fn digest_is_stable() {
        let f = Format::new(vec![1], vec![1]).unwrap();
        let p = PSTensor::new(f, vec![crate::scalar::int(1), crate::scalar::rat(1, 2)]).unwrap();
        assert_eq!(tensor_digest(&p), tensor_digest(&p.clone()));
        assert_eq!(tensor_digest(&p).len(), 64);
    }
}
