//! Exact and numeric decompositions of partially symmetric tensors of border
//! rank at most three, with certificates.

pub mod curves;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod par;
pub mod poly;
pub mod scalar;
pub mod sylvester;
pub mod tensorspace;
pub mod wire;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::{ApproxScalar, ExactScalar, Scalar};
