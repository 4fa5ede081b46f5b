//! Univariate and binary-form polynomial arithmetic.
//!
//! Coefficient vectors are stored low degree first. A binary form of degree
//! `m` is stored as `f[j]` = coefficient of `s^(m-j) t^j`, so dehomogenizing
//! at `s = 1` gives the same vector read as a polynomial in `t`.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

/// Removes trailing zero coefficients.
pub fn trim<T: Scalar>(mut p: Vec<T>) -> Vec<T> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Degree of a polynomial, `None` for the zero polynomial.
pub fn degree<T: Scalar>(p: &[T]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

pub fn derivative<T: Scalar>(p: &[T]) -> Vec<T> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.clone() * T::from_i64(i as i64))
        .collect()
}

pub fn eval<T: Scalar>(p: &[T], x: &T) -> T {
    p.iter()
        .rev()
        .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
}

/// Remainder of `a` by `b` (`b` nonzero).
pub fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let db = degree(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut r = trim(a.to_vec());
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let f = &r[dr] / &lead;
        let shift = dr - db;
        for (j, c) in b.iter().enumerate().take(db + 1) {
            r[shift + j] = &r[shift + j] - &f * c;
        }
        r = trim(r);
    }
    r
}

/// Monic gcd over the rationals; the gcd of two zero polynomials is zero.
pub fn poly_gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    if let Some(d) = degree(&x) {
        let lead = x[d].clone();
        x.iter_mut().for_each(|c| *c = &*c / &lead);
    }
    x
}

/// Exact square-freeness of a binary form of the given degree (roots at
/// infinity included).
pub fn form_is_squarefree(form: &[BigRational], form_degree: usize) -> bool {
    let Some(d) = degree(form) else { return false };
    let at_infinity = form_degree - d;
    if at_infinity > 1 {
        return false;
    }
    let g = poly_gcd(form, &derivative(form));
    degree(&g) == Some(0)
}

/// Truncated power series product mod `t^order`.
pub fn series_mul<T: Scalar>(a: &[T], b: &[T], order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order];
    for (i, x) in a.iter().enumerate().take(order) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Inverse of a unit power series mod `t^order`.
pub fn series_inv<T: Scalar>(a: &[T], order: usize) -> Option<Vec<T>> {
    let a0 = a.first()?.clone();
    if a0.is_zero() {
        return None;
    }
    let inv0 = T::one() / a0;
    let mut out = vec![T::zero(); order];
    if order == 0 {
        return Some(out);
    }
    out[0] = inv0.clone();
    for m in 1..order {
        let mut s = T::zero();
        for j in 1..=m.min(a.len().saturating_sub(1)) {
            s = s + a[j].clone() * out[m - j].clone();
        }
        out[m] = -(s * inv0.clone());
    }
    Some(out)
}

pub fn series_pow<T: Scalar>(a: &[T], e: usize, order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); order];
    if order > 0 {
        out[0] = T::one();
    }
    for _ in 0..e {
        out = series_mul(&out, a, order);
    }
    out
}

/// Evaluates a binary form at homogeneous parameters `(s, t)`.
pub fn eval_form<T: Scalar>(form: &[T], s: &T, t: &T) -> T {
    let m = form.len().saturating_sub(1);
    let mut s_pows = vec![T::one(); m + 1];
    let mut t_pows = vec![T::one(); m + 1];
    for i in 1..=m {
        s_pows[i] = s_pows[i - 1].clone() * s.clone();
        t_pows[i] = t_pows[i - 1].clone() * t.clone();
    }
    form.iter().enumerate().fold(T::zero(), |acc, (j, c)| {
        acc + c.clone() * s_pows[m - j].clone() * t_pows[j].clone()
    })
}

/// Multiplicity of the root `s = 0` of a binary form (the point at infinity).
pub fn infinity_multiplicity<T: Scalar>(form: &[T]) -> usize {
    let m = form.len().saturating_sub(1);
    match degree(form) {
        Some(d) => m - d,
        None => m,
    }
}

/// Gcd of binary forms given as `(coefficients, degree)`; returns the gcd as
/// a binary form (monic in its affine part).
pub fn binary_gcd(forms: &[Vec<BigRational>]) -> Vec<BigRational> {
    let mut s_mult = usize::MAX;
    let mut g: Vec<BigRational> = Vec::new();
    for f in forms {
        if degree(f).is_none() {
            continue;
        }
        s_mult = s_mult.min(infinity_multiplicity(f));
        g = poly_gcd(&g, f);
    }
    if s_mult == usize::MAX {
        return Vec::new();
    }
    let dg = degree(&g).unwrap_or(0);
    let mut out = g[..=dg].to_vec();
    out.extend(std::iter::repeat_n(BigRational::zero(), s_mult));
    out
}

/// Exact quotient of a binary form by a divisor form.
pub fn binary_div(form: &[BigRational], divisor: &[BigRational]) -> Vec<BigRational> {
    let m = form.len() - 1;
    let k = divisor.len() - 1;
    let s_div = infinity_multiplicity(divisor);
    let aff_div = trim(divisor.to_vec());
    let aff = trim(form.to_vec());
    let (q, r) = poly_divmod(&aff, &aff_div);
    debug_assert!(r.iter().all(Zero::is_zero), "binary_div: inexact division");
    let mut q = q;
    q.resize(m - k + 1, BigRational::zero());
    debug_assert!(infinity_multiplicity(form) >= s_div);
    q
}

pub fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let db = degree(b).expect("division by zero polynomial");
    let lead = b[db].clone();
    let mut r = trim(a.to_vec());
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let f = &r[dr] / &lead;
        let shift = dr - db;
        for (j, c) in b.iter().enumerate().take(db + 1) {
            r[shift + j] = &r[shift + j] - &f * c;
        }
        q[shift] = &q[shift] + &f;
        r = trim(r);
    }
    (q, r)
}

pub fn binary_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    poly_mul(a, b)
}

// ------------------------------------------------------------ root finding --

fn horner_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut val = Complex64::zero();
    let mut der = Complex64::zero();
    for c in p.iter().rev() {
        der = der * z + val;
        val = val * z + c;
    }
    (val, der)
}

/// All complex roots of a polynomial (low degree first) by Aberth-Ehrlich
/// iteration followed by Newton polishing.
pub fn roots(p: &[Complex64]) -> Vec<Complex64> {
    let p = trim(p.to_vec());
    let Some(n) = degree(&p) else {
        return Vec::new();
    };
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    // Roots at zero are split off exactly.
    let zeros = monic.iter().position(|c| c.norm() != 0.0).unwrap_or(0);
    let reduced = &monic[zeros..];
    let m = reduced.len() - 1;
    let mut out = vec![Complex64::zero(); zeros];
    if m == 0 {
        return out;
    }
    if m == 1 {
        out.push(-reduced[0]);
        return out;
    }
    // Fujiwara-style radius for the initial circle.
    let radius = (0..m)
        .map(|k| reduced[k].norm().powf(1.0 / (m - k) as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4;
            Complex64::from_polar(radius, ang)
        })
        .collect();
    for _ in 0..800 {
        let mut max_step: f64 = 0.0;
        for k in 0..m {
            let (v, d) = horner_with_derivative(reduced, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let sum: Complex64 = (0..m)
                .filter(|&j| j != k)
                .map(|j| Complex64::one() / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::one() - ratio * sum);
            if !Scalar::is_finite(&w) {
                continue;
            }
            z[k] -= w;
            max_step = max_step.max(w.norm() / z[k].norm().max(1.0));
        }
        if max_step < 1e-16 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = horner_with_derivative(reduced, *zk);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !Scalar::is_finite(&step) {
                break;
            }
            *zk -= step;
        }
    }
    out.extend(z);
    out
}

/// Homogeneous roots `(s, t)` of a binary form, each normalized to unit norm.
/// Roots at infinity appear as `(0, 1)`.
pub fn binary_roots(form: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let inf = infinity_multiplicity(form);
    let mut out: Vec<(Complex64, Complex64)> = roots(form)
        .into_iter()
        .map(|t| {
            let n = (1.0 + t.norm_sqr()).sqrt();
            (Complex64::new(1.0 / n, 0.0), t / n)
        })
        .collect();
    out.extend(std::iter::repeat_n(
        (Complex64::zero(), Complex64::one()),
        inf,
    ));
    out
}
