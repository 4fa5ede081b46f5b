//! Ranks and decompositions on rational normal curves: catalecticants,
//! Sylvester's algorithm, and decomposition on any rational curve by lifting
//! through its linearization.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{linearize, CurveDecomposition, CurveMap, DEDUP_TOL, DEFAULT_RETRIES};
use crate::error::{invalid, Error, Result};
use crate::linalg::{require_in_span, solve_in_span, LinearAlgebra, Matrix, DEFAULT_RANK_TAU};
use crate::poly::{binary_roots, form_is_squarefree};
use crate::scalar::{to_complex_vec, Scalar};
use crate::tensorspace::verify::projective_residual;
use crate::tensorspace::{Decomposition, PSTensor, Term};

/// A point of the span of the degree-`a` rational normal curve, in the
/// monomial coordinates of `t -> (1, t, ..., t^a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPoint<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> BinaryPoint<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(invalid("binary point needs degree at least 1"));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(invalid("binary point is zero"));
        }
        Ok(BinaryPoint { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
}

/// `(s^a, s^(a-1) t, ..., t^a)`.
pub fn rnc_point<T: Scalar>(a: usize, s: &T, t: &T) -> Vec<T> {
    let mut sp = vec![T::one(); a + 1];
    let mut tp = vec![T::one(); a + 1];
    for i in 1..=a {
        sp[i] = sp[i - 1].clone() * s.clone();
        tp[i] = tp[i - 1].clone() * t.clone();
    }
    (0..=a).map(|m| sp[a - m].clone() * tp[m].clone()).collect()
}

/// `q = sum coeffs_j * rnc_point(a, s_j, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RncDecomposition {
    pub a: usize,
    pub params: Vec<(Complex64, Complex64)>,
    pub coeffs: Vec<Complex64>,
}

impl RncDecomposition {
    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn evaluate(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.a + 1];
        for ((s, t), c) in self.params.iter().zip(&self.coeffs) {
            for (o, v) in out.iter_mut().zip(rnc_point(self.a, s, t)) {
                *o += c * v;
            }
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<Complex64>> {
        self.params
            .iter()
            .map(|(s, t)| rnc_point(self.a, s, t))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SylvesterOptions {
    pub seed: u64,
    pub retries: usize,
    /// Relative residual accepted for the Vandermonde solve.
    pub tol: f64,
}

impl Default for SylvesterOptions {
    fn default() -> Self {
        SylvesterOptions {
            seed: 0,
            retries: DEFAULT_RETRIES,
            tol: 1e-9,
        }
    }
}

/// Fields on which square-freeness of a binary form can be decided.
pub trait FormField: LinearAlgebra {
    fn is_squarefree(form: &[Self], degree: usize) -> bool;
}

impl FormField for BigRational {
    fn is_squarefree(form: &[Self], degree: usize) -> bool {
        form_is_squarefree(form, degree)
    }
}

impl FormField for Complex64 {
    fn is_squarefree(form: &[Self], degree: usize) -> bool {
        let r = binary_roots(form);
        r.len() == degree && distinct_roots(&r)
    }
}

fn distinct_roots(r: &[(Complex64, Complex64)]) -> bool {
    for i in 0..r.len() {
        for j in i + 1..r.len() {
            if (r[i].0 * r[j].1 - r[i].1 * r[j].0).norm() <= DEDUP_TOL {
                return false;
            }
        }
    }
    true
}

/// Hankel matrix of shape `(a - s + 1) x (s + 1)` with entry `(i, j) = q_{i+j}`.
pub fn catalecticant<T: Scalar>(q: &BinaryPoint<T>, s: usize) -> Result<Matrix<T>> {
    let a = q.degree();
    if s > a + 1 {
        return Err(invalid(format!(
            "catalecticant index {s} exceeds degree {a} + 1"
        )));
    }
    let rows = a + 1 - s;
    let data = (0..rows)
        .flat_map(|i| (0..=s).map(move |j| (i, j)))
        .map(|(i, j)| q.coeffs[i + j].clone())
        .collect();
    Matrix::new(rows, s + 1, data)
}

/// Integer weights for kernel combinations: unit vectors first, then a
/// fixed grid, then seeded random draws.
fn combination_weights(m: usize, retries: usize, seed: u64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for i in 0..m {
        let mut w = vec![0; m];
        w[i] = 1;
        out.push(w);
    }
    if m > 1 {
        for g in 1..=3i64 {
            out.push(
                (0..m as u32)
                    .map(|k| (g + 1).pow(k.min(8)) * if k % 2 == 1 { -1 } else { 1 })
                    .collect(),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..retries {
            out.push((0..m).map(|_| rng.gen_range(-50..=50)).collect());
        }
    }
    out
}

/// Tries to decompose `q` with exactly the roots of a square-free form of
/// degree `s` apolar to `q`. `None` if no such form was found.
pub fn sylvester_at<T: FormField>(
    q: &BinaryPoint<T>,
    s: usize,
    opts: &SylvesterOptions,
) -> Result<Option<RncDecomposition>> {
    let a = q.degree();
    let cat = catalecticant(q, s)?;
    let kernel = if cat.rows() == 0 {
        (0..=s)
            .map(|i| {
                let mut e = vec![T::zero(); s + 1];
                e[i] = T::one();
                e
            })
            .collect()
    } else {
        T::kernel_of(&cat, DEFAULT_RANK_TAU)?
    };
    if kernel.is_empty() {
        return Ok(None);
    }
    let qc = to_complex_vec(&q.coeffs);
    for w in combination_weights(kernel.len(), opts.retries, opts.seed ^ (s as u64)) {
        let mut form = vec![T::zero(); s + 1];
        for (wk, kv) in w.iter().zip(&kernel) {
            if *wk == 0 {
                continue;
            }
            let wk = T::from_i64(*wk);
            for (f, x) in form.iter_mut().zip(kv) {
                *f = f.clone() + wk.clone() * x.clone();
            }
        }
        if form.iter().all(Zero::is_zero) || !T::is_squarefree(&form, s) {
            continue;
        }
        let roots = binary_roots(&to_complex_vec(&form));
        if roots.len() != s || !distinct_roots(&roots) {
            continue;
        }
        let cols: Vec<Vec<Complex64>> = roots.iter().map(|(x, y)| rnc_point(a, x, y)).collect();
        let Some(lambda) = solve_in_span(&qc, &cols, opts.tol)? else {
            continue;
        };
        let dec = RncDecomposition {
            a,
            params: roots,
            coeffs: lambda,
        };
        if projective_residual(&qc, &dec.evaluate()) <= opts.tol {
            return Ok(Some(prune(dec)));
        }
    }
    Ok(None)
}

fn prune(mut dec: RncDecomposition) -> RncDecomposition {
    let scale = dec.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let keep: Vec<bool> = dec
        .coeffs
        .iter()
        .map(|c| c.norm() > 1e-12 * scale)
        .collect();
    let mut k = keep.iter();
    dec.params.retain(|_| *k.next().unwrap());
    let mut k = keep.iter();
    dec.coeffs.retain(|_| *k.next().unwrap());
    dec
}

/// Minimal decomposition on the rational normal curve (the curve rank of `q`).
pub fn sylvester_general<T: FormField>(
    q: &BinaryPoint<T>,
    opts: &SylvesterOptions,
) -> Result<RncDecomposition> {
    let a = q.degree();
    for s in 1..=a + 1 {
        if let Some(d) = sylvester_at(q, s, opts)? {
            return Ok(d);
        }
    }
    Err(Error::RetriesExhausted { seed: opts.seed })
}

/// Decomposition of `q = sum_{m<c} y_m e_m`, a point of the span of the
/// order-`c` jet of the curve at `t = 0` but not of the order-`(c-1)` jet.
/// For `c <= ceil((a+1)/2)` the size is exactly `a + 2 - c`; otherwise it
/// is at most `c`.
pub fn sylvester_from_jet(
    a: usize,
    c: usize,
    y: &[BigRational],
    opts: &SylvesterOptions,
) -> Result<RncDecomposition> {
    if a == 0 {
        return Err(invalid("curve degree must be positive"));
    }
    if c == 0 || c > a + 1 || y.len() != c {
        return Err(invalid(format!(
            "jet order {c} with {} coordinates does not fit degree {a}",
            y.len()
        )));
    }
    if y[c - 1].is_zero() {
        return Err(Error::NotMinimal);
    }
    let mut q = y.to_vec();
    q.resize(a + 1, BigRational::zero());
    let q = BinaryPoint::new(q)?;
    if c == 1 {
        return Ok(RncDecomposition {
            a,
            params: vec![(Complex64::one(), Complex64::zero())],
            coeffs: vec![y[0].to_complex()],
        });
    }
    if c <= (a + 1).div_ceil(2) {
        let s = a + 2 - c;
        return match sylvester_at(&q, s, opts)? {
            Some(d) if d.size() == s => Ok(d),
            _ => Err(Error::RetriesExhausted { seed: opts.seed }),
        };
    }
    sylvester_general(&q, opts)
}

/// Decomposes `p` on the curve `h`: lift `p` to the rational normal curve
/// through the linearization (restricted to the order-`c` jet at `t = 0`
/// when `border_order` is given), decompose there, push the points forward.
pub fn decompose_via_curve(
    h: &CurveMap,
    p: &PSTensor<BigRational>,
    border_order: Option<usize>,
    opts: &SylvesterOptions,
) -> Result<CurveDecomposition> {
    if h.format() != &p.format {
        return Err(invalid("curve and tensor formats differ"));
    }
    let a = h.embedded_degree();
    if a == 0 {
        return Err(invalid("curve is constant"));
    }
    let rnc = match border_order {
        Some(c) => {
            if c > a + 1 {
                return Err(invalid(format!(
                    "jet order {c} exceeds curve degree {a} + 1"
                )));
            }
            let y = require_in_span(&p.coeffs, &h.jet_vectors(c), 0.0)?;
            sylvester_from_jet(a, c, &y, opts)?
        }
        None => {
            let lin = linearize(h);
            let y = require_in_span(&p.coeffs, &lin.columns(), 0.0)?;
            sylvester_general(&BinaryPoint::new(y)?, opts)?
        }
    };
    push_forward(h, p, &rnc, opts.tol)
}

/// Maps an RNC decomposition to the product space along `h`; coefficients
/// carry over because `embed(h(s, t)) = Lambda * rnc_point(s, t)`.
pub fn push_forward(
    h: &CurveMap,
    p: &PSTensor<BigRational>,
    rnc: &RncDecomposition,
    tol: f64,
) -> Result<CurveDecomposition> {
    let terms: Vec<Term<Complex64>> = rnc
        .params
        .iter()
        .zip(&rnc.coeffs)
        .map(|((s, t), c)| Term {
            coeff: *c,
            point: h.eval(s, t),
        })
        .collect();
    let params = rnc.params.iter().map(|(s, t)| (0, *s, *t)).collect();
    let dec = Decomposition::new(h.format().clone(), terms)?;
    let residual = projective_residual(&to_complex_vec(&p.coeffs), &dec.evaluate()?);
    if residual > tol.max(1e-12) * 10.0 {
        return Err(Error::VerificationFailed { residual, tol });
    }
    Ok(CurveDecomposition {
        decomposition: dec,
        params,
        attempts: 1,
    })
}
