//! Decomposition pipelines: points of the third secant variety given by a
//! border presentation, and points in the span of a curvilinear scheme.

pub mod autarky;
pub mod certificate;
pub mod curvilinear;
pub mod presentation;
pub mod sigma3;

pub use autarky::{autarky_reduce, AutarkyReduction, KeptFactor};
pub use certificate::{
    bound_curvilinear, bound_sigma3, certify, tensor_digest, Certificate, EngineOptions,
    EngineOutput, RankClaim, Status,
};
pub use curvilinear::{decompose_curvilinear, minimalize_presentation};
pub use presentation::{tangent_support, BorderPresentation, TangentPresentation};
pub use sigma3::{decompose_sigma3, decompose_tangent, rank_one_point};

use num_rational::BigRational;
use num_traits::Zero;

use crate::tensorspace::{embed, Format, PSTensor, ProductPoint};

/// `r` with `p = r * v`, if it exists.
pub(crate) fn scalar_multiple(p: &[BigRational], v: &[BigRational]) -> Option<BigRational> {
    let j = v.iter().position(|x| !x.is_zero())?;
    let r = &p[j] / &v[j];
    p.iter().zip(v).all(|(a, b)| *a == &r * b).then_some(r)
}

/// Coefficient of `embed(x)` in `p` when `p` is that multiple.
pub(crate) fn multiple_of_point(
    format: &Format,
    p: &[BigRational],
    x: &ProductPoint<BigRational>,
) -> Option<BigRational> {
    let e = embed(format, x).ok()?;
    scalar_multiple(p, &e.coeffs)
}

pub(crate) fn tensor(
    format: &Format,
    coeffs: Vec<BigRational>,
) -> crate::Result<PSTensor<BigRational>> {
    PSTensor::new(format.clone(), coeffs)
}
