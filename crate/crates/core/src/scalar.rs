//! Scalar fields: exact rationals and double-precision complex numbers.
//!
//! Every algorithm that only needs field operations is written once against
//! [`Scalar`]; elimination-based routines branch on [`Scalar::EXACT`] where
//! exact zero tests and numerical thresholds have to differ.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type ExactScalar = BigRational;
pub type ApproxScalar = Complex64;

/// Working precision of the approximate field, in mantissa bits.
pub const NATIVE_PRECISION_BITS: u32 = 53;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;

    fn from_rational(q: &BigRational) -> Self;

    fn from_i64(v: i64) -> Self;

    fn to_complex(&self) -> Complex64;

    /// Absolute value as a float, used for pivoting and norms.
    fn magnitude(&self) -> f64;

    fn is_finite(&self) -> bool;

    fn conj(&self) -> Self;
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }

    fn magnitude(&self) -> f64 {
        rational_to_f64(&self.abs())
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_rational(q: &BigRational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        return v;
    }
    // Ratio::to_f64 gives up on huge operands; fall back to scaled integer division.
    let n = q.numer();
    let d = q.denom();
    let shift = n.bits() as i64 - d.bits() as i64;
    let (num, den) = if shift > 0 {
        (n.clone(), d.clone() << (shift as usize))
    } else {
        (n.clone() << ((-shift) as usize), d.clone())
    };
    let mantissa = BigRational::new(num, den).to_f64().unwrap_or(0.0);
    mantissa * 2f64.powi(shift as i32)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `"num/den"`, with the denominator omitted when it is 1.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Accepts `"n"`, `"n/d"` and plain decimals such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| invalid(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits
            .parse()
            .map_err(|_| invalid(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| invalid(format!("bad rational {s:?}")))?;
    Ok(BigRational::from_integer(n))
}

pub fn format_complex(z: &Complex64) -> [String; 2] {
    [format!("{}", z.re), format!("{}", z.im)]
}

pub fn parse_complex(re: &str, im: &str) -> Result<Complex64> {
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad real part {re:?}")))?;
    let im: f64 = im
        .trim()
        .parse()
        .map_err(|_| invalid(format!("bad imaginary part {im:?}")))?;
    let z = Complex64::new(re, im);
    if !Scalar::is_finite(&z) {
        return Err(invalid("non-finite complex value"));
    }
    Ok(z)
}

/// Euclidean norm of a vector in either field, as a float.
pub fn norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.magnitude().powi(2)).sum::<f64>().sqrt()
}

pub fn to_complex_vec<T: Scalar>(v: &[T]) -> Vec<Complex64> {
    v.iter().map(Scalar::to_complex).collect()
}

pub fn to_exact_vec(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| int(x)).collect()
}
