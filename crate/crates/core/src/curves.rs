//! Parametrized rational curves through curvilinear schemes: jet extension,
//! per-factor Möbius / conic / ramified maps, linearization and
//! hyperplane-section decomposition.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{bareiss_rank, independent_subset, kernel_basis, solve_in_span, Matrix};
use crate::poly::{binary_div, binary_gcd, binary_roots, degree, eval_form, series_mul};
use crate::scalar::{norm, to_complex_vec, Scalar};
use crate::tensorspace::jet::{kron_series, monomial_series, series_to_vectors};
use crate::tensorspace::{
    embed, Decomposition, Format, JetScheme, PSTensor, ProductPoint, Series, Term,
};

/// Default number of fresh random draws for randomized searches.
pub const DEFAULT_RETRIES: usize = 32;

/// Relative distance below which two numerically computed points coincide.
pub const DEDUP_TOL: f64 = 1e-7;

/// Binary form: `f[j]` is the coefficient of `s^(deg-j) t^j`.
pub type Form = Vec<BigRational>;

/// One factor of a curve map: `n + 1` binary forms of a common degree.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    forms: Vec<Form>,
}

impl FactorMap {
    /// Pads all forms to a common degree; rejects the all-zero map.
    pub fn new(forms: Vec<Form>) -> Result<Self> {
        if forms.is_empty() {
            return Err(invalid("factor map has no coordinates"));
        }
        if forms.iter().all(|f| degree(f).is_none()) {
            return Err(invalid("factor map is identically zero"));
        }
        let len = forms.iter().map(Vec::len).max().unwrap_or(1).max(1);
        if forms.iter().any(|f| f.len() != len && degree(f).is_some()) {
            return Err(invalid(
                "coordinate forms of one factor must share a degree",
            ));
        }
        let forms = forms
            .into_iter()
            .map(|mut f| {
                f.resize(len, BigRational::zero());
                f
            })
            .collect();
        Ok(FactorMap { forms })
    }

    /// The constant map onto `x`.
    pub fn constant(x: &[BigRational]) -> Result<Self> {
        FactorMap::new(x.iter().map(|v| vec![v.clone()]).collect())
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn degree(&self) -> usize {
        self.forms[0].len() - 1
    }

    /// Removes the common factor of the coordinate forms.
    pub fn reduced(&self) -> FactorMap {
        let g = binary_gcd(&self.forms);
        if g.len() <= 1 {
            return self.clone();
        }
        FactorMap {
            forms: self.forms.iter().map(|f| binary_div(f, &g)).collect(),
        }
    }

    pub fn is_basepoint_free(&self) -> bool {
        binary_gcd(&self.forms).len() <= 1
    }

    pub fn eval<T: Scalar>(&self, s: &T, t: &T) -> Vec<T> {
        self.forms
            .iter()
            .map(|f| {
                let fc: Vec<T> = f.iter().map(T::from_rational).collect();
                eval_form(&fc, s, t)
            })
            .collect()
    }

    /// Dehomogenized coordinates at `s = 1` as truncated series.
    pub fn series(&self, order: usize) -> Vec<Series> {
        self.forms
            .iter()
            .map(|f| {
                let mut v: Series = f.iter().take(order).cloned().collect();
                v.resize(order, BigRational::zero());
                v
            })
            .collect()
    }
}

/// A morphism from the projective line into the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveMap {
    format: Format,
    factors: Vec<FactorMap>,
}

impl CurveMap {
    pub fn new(format: Format, factors: Vec<FactorMap>) -> Result<Self> {
        if factors.len() != format.k() {
            return Err(invalid(format!(
                "curve has {} factors, format has {}",
                factors.len(),
                format.k()
            )));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.forms.len() != format.dims()[i] + 1 {
                return Err(invalid(format!(
                    "curve factor {} has {} coordinates, expected {}",
                    i + 1,
                    f.forms.len(),
                    format.dims()[i] + 1
                )));
            }
            if !f.is_basepoint_free() {
                return Err(invalid(format!("curve factor {} has a base point", i + 1)));
            }
        }
        Ok(CurveMap { format, factors })
    }

    pub fn format(&self) -> &Format {
        &self.format
    }

    pub fn factors(&self) -> &[FactorMap] {
        &self.factors
    }

    pub fn multidegree(&self) -> Vec<usize> {
        self.factors.iter().map(FactorMap::degree).collect()
    }

    /// Degree of the embedded curve, `sum c_i d_i`.
    pub fn embedded_degree(&self) -> usize {
        self.factors
            .iter()
            .zip(self.format.degrees())
            .map(|(f, d)| f.degree() * d)
            .sum()
    }

    pub fn eval<T: Scalar>(&self, s: &T, t: &T) -> ProductPoint<T> {
        ProductPoint {
            factors: self.factors.iter().map(|f| f.eval(s, t)).collect(),
        }
    }

    /// Exact point at the affine parameter `t` (`s = 1`).
    pub fn point_at(&self, t: &BigRational) -> ProductPoint<BigRational> {
        self.eval(&BigRational::one(), t)
    }

    /// The order-`order` jet of the curve at `t = 0`.
    pub fn jet_at_zero(&self, order: usize) -> Result<JetScheme> {
        JetScheme::new(
            self.format.clone(),
            order,
            self.factors.iter().map(|f| f.series(order)).collect(),
        )
    }

    /// Taylor coefficient vectors of `t -> embed(h(1, t))` up to `order`;
    /// these are the first `order` columns of the linearization.
    pub fn jet_vectors(&self, order: usize) -> Vec<Vec<BigRational>> {
        let parts: Vec<Vec<Series>> = self
            .factors
            .iter()
            .zip(self.format.degrees())
            .map(|(f, &d)| monomial_series(&f.series(order), d, order))
            .collect();
        series_to_vectors(kron_series(vec![BigRational::one()], &parts, order), order)
    }

    /// Exponent `kappa > 1` when every coordinate form is a form in
    /// `(s^kappa, t^kappa)`, so the parametrization is a `kappa`-fold cover.
    pub fn substitution_exponent(&self) -> usize {
        let mut g = 0usize;
        for f in &self.factors {
            g = g.gcd(&f.degree());
            for form in &f.forms {
                for (j, c) in form.iter().enumerate() {
                    if !c.is_zero() {
                        g = g.gcd(&j);
                    }
                }
            }
        }
        g.max(1)
    }

    /// Applies `t^kappa -> t`; returns the exponent and the reduced map.
    pub fn remove_substitution(&self) -> (usize, CurveMap) {
        let kappa = self.substitution_exponent();
        if kappa == 1 {
            return (1, self.clone());
        }
        let factors = self
            .factors
            .iter()
            .map(|f| FactorMap {
                forms: f
                    .forms
                    .iter()
                    .map(|form| form.iter().step_by(kappa).cloned().collect())
                    .collect(),
            })
            .collect();
        (
            kappa,
            CurveMap {
                format: self.format.clone(),
                factors,
            },
        )
    }
}

/// A connected union of rational curves sharing a format.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    components: Vec<CurveMap>,
}

impl PiecewiseCurve {
    pub fn new(components: Vec<CurveMap>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid("piecewise curve needs a component"));
        };
        if components.iter().any(|c| c.format() != first.format()) {
            return Err(invalid("curve components use different formats"));
        }
        Ok(PiecewiseCurve { components })
    }

    pub fn components(&self) -> &[CurveMap] {
        &self.components
    }

    pub fn format(&self) -> &Format {
        self.components[0].format()
    }

    pub fn total_degree(&self) -> usize {
        self.components.iter().map(CurveMap::embedded_degree).sum()
    }
}

/// `embed(h(s, t)) = matrix * (s^a, s^(a-1) t, ..., t^a)` as an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Linearization {
    pub degree: usize,
    pub matrix: Matrix<BigRational>,
}

impl Linearization {
    /// `rank - 1` is the dimension of the linear span of the curve.
    pub fn rank(&self) -> usize {
        bareiss_rank(&self.matrix)
    }

    pub fn columns(&self) -> Vec<Vec<BigRational>> {
        (0..self.matrix.cols())
            .map(|j| self.matrix.column(j))
            .collect()
    }
}

pub fn linearize(h: &CurveMap) -> Linearization {
    let a = h.embedded_degree();
    let cols = h.jet_vectors(a + 1);
    Linearization {
        degree: a,
        matrix: Matrix::from_columns(&cols).expect("jet vectors share a length"),
    }
}

// ------------------------------------------------------------ jet -> map --

/// Extends a jet `(g_0, ..., g_n) mod t^c` to a morphism: homogenize each
/// coordinate to degree `c`, strip the common factor. Returns `(e, map)`
/// with `e = c - deg gcd`.
pub fn extend_jet_to_map(jet: &[Series], c: usize) -> Result<(usize, FactorMap)> {
    if c == 0 {
        return Err(invalid("jet order must be positive"));
    }
    if jet.iter().all(|g| g.iter().take(c).all(Zero::is_zero)) {
        return Err(invalid("jet is identically zero"));
    }
    if jet.iter().all(|g| g.first().is_none_or(Zero::is_zero)) {
        return Err(invalid("jet has no unit coordinate at t = 0"));
    }
    let lifts: Vec<Form> = jet
        .iter()
        .map(|g| {
            let mut f: Form = g.iter().take(c).cloned().collect();
            f.resize(c + 1, BigRational::zero());
            f
        })
        .collect();
    let map = FactorMap { forms: lifts }.reduced();
    Ok((map.degree(), map))
}

/// Whether two coordinate jets agree projectively mod `t^order`.
pub fn jets_match(a: &[Series], b: &[Series], order: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let pad = |s: &Series| {
        let mut v: Series = s.iter().take(order).cloned().collect();
        v.resize(order, BigRational::zero());
        v
    };
    let a: Vec<Series> = a.iter().map(pad).collect();
    let b: Vec<Series> = b.iter().map(pad).collect();
    let Some(r) = a.iter().position(|s| !s[0].is_zero()) else {
        return false;
    };
    if b[r][0].is_zero() {
        return false;
    }
    (0..a.len()).all(|j| series_mul(&a[j], &b[r], order) == series_mul(&b[j], &a[r], order))
}

/// Degree-1 isomorphism `P^1 -> P^1` whose 3-jet at 0 has affine value `y0`,
/// first derivative `y1` and second derivative `y2`: the map
/// `y0 + y1 t / (1 - (y2 / (2 y1)) t)`. Coordinates are `(X0, X1)` with
/// affine coordinate `X1 / X0`.
pub fn mobius_from_3jet(y0: &BigRational, y1: &BigRational, y2: &BigRational) -> Result<FactorMap> {
    if y1.is_zero() {
        return Err(Error::NotAnEmbedding);
    }
    let beta = y2 / (y1 * BigRational::from_integer(2.into()));
    let x0 = vec![BigRational::one(), -beta.clone()];
    let x1 = vec![y0.clone(), y1 - y0 * &beta];
    FactorMap::new(vec![x0, x1])
}

/// Degree-2 map onto a smooth conic with the given 3-jet: with Taylor
/// vectors `f0, f1, f2` of the lift (independent), `f0 s^2 + f1 st + f2 t^2`.
pub fn conic_through_3jet(jet: &[Series]) -> Result<FactorMap> {
    let taylor: Vec<Vec<BigRational>> = (0..3)
        .map(|m| {
            jet.iter()
                .map(|s| s.get(m).cloned().unwrap_or_else(BigRational::zero))
                .collect()
        })
        .collect();
    let m = Matrix::from_columns(&taylor)?;
    if bareiss_rank(&m) < 3 {
        return Err(Error::DegenerateJet(
            "the 3-jet spans at most a line".into(),
        ));
    }
    FactorMap::new(
        (0..jet.len())
            .map(|j| {
                vec![
                    taylor[0][j].clone(),
                    taylor[1][j].clone(),
                    taylor[2][j].clone(),
                ]
            })
            .collect(),
    )
}

/// Coefficients of the conics containing the 3-jet, as a kernel basis on
/// `(x0^2, x0 x1, x0 x2, x1^2, x1 x2, x2^2)`.
pub fn conics_through_3jet(jet: &[Series]) -> Result<Vec<Vec<BigRational>>> {
    if jet.len() != 3 {
        return Err(invalid("conics live in the projective plane"));
    }
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let rows: Vec<Vec<BigRational>> = (0..3)
        .map(|m| {
            pairs
                .iter()
                .map(|&(i, j)| series_mul(&jet[i], &jet[j], 3)[m].clone())
                .collect()
        })
        .collect();
    kernel_basis(&Matrix::from_rows(&rows)?)
}

/// Per-factor curve through an order-3 jet: local degree 3 in a line gives a
/// Möbius map, local degree 3 spanning a plane gives a conic, local degree 2
/// gives the degree-2 ramified extension. Local degree 1 is rejected.
pub fn curve_through_jet3(z: &JetScheme) -> Result<CurveMap> {
    if z.order() != 3 {
        return Err(invalid(format!(
            "expected an order-3 jet, got order {}",
            z.order()
        )));
    }
    let mut factors = Vec::with_capacity(z.format().k());
    for i in 0..z.format().k() {
        let fj = z.project_factor(i)?;
        let coords = &fj.coords;
        let map = match (fj.local_degree(), fj.span_rank()) {
            (3, 3) => conic_through_3jet(coords)?,
            (3, 2) => line_mobius(coords)?,
            (2, _) => extend_jet_to_map(coords, 3)?.1,
            (1, _) => return Err(Error::AutarkyViolation { factor: i + 1 }),
            (l, r) => {
                return Err(Error::DegenerateJet(format!(
                    "factor {} has local degree {l}, span {r}",
                    i + 1
                )))
            }
        };
        factors.push(map);
    }
    CurveMap::new(z.format().clone(), factors)
}

/// Möbius map for a 3-jet spanning a line inside any `P^n`.
fn line_mobius(coords: &[Series]) -> Result<FactorMap> {
    let f0: Vec<BigRational> = coords.iter().map(|s| s[0].clone()).collect();
    let f1: Vec<BigRational> = coords.iter().map(|s| s[1].clone()).collect();
    let f2: Vec<BigRational> = coords.iter().map(|s| s[2].clone()).collect();
    let (alpha_beta, basis1) =
        if bareiss_rank(&Matrix::from_columns(&[f0.clone(), f1.clone()])?) == 2 {
            (solve_in_span(&f2, &[f0.clone(), f1.clone()], 0.0)?, f1)
        } else {
            return Err(Error::NotAnEmbedding);
        };
    let ab =
        alpha_beta.ok_or_else(|| Error::DegenerateJet("3-jet leaves its tangent line".into()))?;
    // lift = f0 (1 + alpha t^2) + f1 (t + beta t^2); affine coordinate t + beta t^2 + O(t^3)
    let beta = &ab[1];
    FactorMap::new(
        f0.iter()
            .zip(&basis1)
            .map(|(a, b)| vec![a.clone(), b - &(a * beta)])
            .collect(),
    )
}

// ---------------------------------------------------- hyperplane sections --

/// A decomposition on a curve, with the curve parameter of every point.
#[derive(Debug, Clone)]
pub struct CurveDecomposition {
    pub decomposition: Decomposition<Complex64>,
    /// `(component, s, t)` per term.
    pub params: Vec<(usize, Complex64, Complex64)>,
    pub attempts: usize,
}

fn random_small_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<BigRational> {
    (0..len)
        .map(|_| BigRational::from_integer(rng.gen_range(-20i64..=20).into()))
        .collect()
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Decomposes `p` on a piecewise rational curve by intersecting it with
/// random hyperplanes through `p`: the section points span the section of
/// the curve's linear span, so `p` is a combination of at most
/// `total_degree` of them.
pub fn hyperplane_section_decompose(
    curve: &PiecewiseCurve,
    p: &PSTensor<BigRational>,
    seed: u64,
    retries: usize,
    tol: f64,
) -> Result<CurveDecomposition> {
    if curve.format() != &p.format {
        return Err(invalid("curve and tensor formats differ"));
    }
    if p.is_zero() {
        return Err(invalid("zero tensor"));
    }
    let lins: Vec<Linearization> = curve.components().iter().map(linearize).collect();
    let all_cols: Vec<Vec<BigRational>> = lins.iter().flat_map(Linearization::columns).collect();
    if solve_in_span(&p.coeffs, &all_cols, 0.0)?.is_none() {
        return Err(Error::NotInSpan);
    }
    let pc = to_complex_vec(&p.coeffs);
    // a point of the curve equal to p is found directly by every section
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=retries.max(1) {
        let l0 = random_small_vector(&mut rng, p.coeffs.len());
        let l1 = random_small_vector(&mut rng, p.coeffs.len());
        let a0 = dot(&l0, &p.coeffs);
        let a1 = dot(&l1, &p.coeffs);
        if a0.is_zero() && a1.is_zero() {
            continue;
        }
        let ell: Vec<BigRational> = l0.iter().zip(&l1).map(|(x, y)| &a1 * x - &a0 * y).collect();
        let mut cands: Vec<(usize, Complex64, Complex64, ProductPoint<Complex64>)> = Vec::new();
        let mut degenerate = false;
        for (ci, (comp, lin)) in curve.components().iter().zip(&lins).enumerate() {
            let form: Vec<BigRational> = lin.columns().iter().map(|c| dot(&ell, c)).collect();
            if degree(&form).is_none() {
                degenerate = lin.degree > 0;
                if degenerate {
                    break;
                }
                // a constant component lies in the hyperplane: its point is a candidate
                let x = comp.eval(&Complex64::one(), &Complex64::zero());
                cands.push((ci, Complex64::one(), Complex64::zero(), x));
                continue;
            }
            for (s, t) in binary_roots(&to_complex_vec(&form)) {
                let x = comp.eval(&s, &t);
                if !cands.iter().any(|c| c.3.projectively_eq(&x, DEDUP_TOL)) {
                    cands.push((ci, s, t, x));
                }
            }
        }
        if degenerate || cands.is_empty() {
            continue;
        }
        let vecs: Vec<Vec<Complex64>> = cands
            .iter()
            .map(|c| embed(&p.format, &c.3).map(|e| e.coeffs))
            .collect::<Result<_>>()?;
        if let Some(res) = solve_on_candidates(&pc, &cands, &vecs, &p.format, tol)? {
            return Ok(CurveDecomposition {
                decomposition: res.0,
                params: res.1,
                attempts: attempt,
            });
        }
    }
    Err(Error::RetriesExhausted { seed })
}

type Candidate = (usize, Complex64, Complex64, ProductPoint<Complex64>);

#[allow(clippy::type_complexity)]
fn solve_on_candidates(
    pc: &[Complex64],
    cands: &[Candidate],
    vecs: &[Vec<Complex64>],
    format: &Format,
    tol: f64,
) -> Result<Option<(Decomposition<Complex64>, Vec<(usize, Complex64, Complex64)>)>> {
    let pn = norm(pc);
    // single point first, so points of the curve come out with size one
    for (c, v) in cands.iter().zip(vecs) {
        if crate::tensorspace::format::proportional(pc, v, tol) {
            let lambda = ratio(pc, v);
            let dec = Decomposition::new(
                format.clone(),
                vec![Term {
                    coeff: lambda,
                    point: c.3.clone(),
                }],
            )?;
            return Ok(Some((dec, vec![(c.0, c.1, c.2)])));
        }
    }
    let keep = independent_subset(vecs, 1e-20);
    let gens: Vec<Vec<Complex64>> = keep.iter().map(|&i| vecs[i].clone()).collect();
    let Some(coeffs) = solve_in_span(pc, &gens, tol)? else {
        return Ok(None);
    };
    let mut terms = Vec::new();
    let mut params = Vec::new();
    let scale = coeffs
        .iter()
        .zip(&gens)
        .map(|(c, g)| c.norm() * norm(g))
        .fold(0.0, f64::max);
    for ((&i, c), g) in keep.iter().zip(&coeffs).zip(&gens) {
        if c.norm() * norm(g) <= 1e-12 * scale.max(pn) {
            continue;
        }
        terms.push(Term {
            coeff: *c,
            point: cands[i].3.clone(),
        });
        params.push((cands[i].0, cands[i].1, cands[i].2));
    }
    let dec = Decomposition {
        format: format.clone(),
        terms,
    };
    let sum = dec.evaluate()?;
    let residual = crate::tensorspace::verify::projective_residual(pc, &sum);
    if residual > tol || dec.terms.is_empty() {
        return Ok(None);
    }
    Ok(Some((dec, params)))
}

fn ratio(p: &[Complex64], v: &[Complex64]) -> Complex64 {
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    v.iter()
        .zip(p)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        / vv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::tensorspace::verify::{verify_numeric, DEFAULT_VERIFY_TOL};

    fn s(v: &[i64]) -> Series {
        v.iter().map(|&x| int(x)).collect()
    }

    fn diagonal(k: usize) -> CurveMap {
        let f = Format::segre_p1(k).unwrap();
        CurveMap::new(
            f,
            (0..k)
                .map(|_| FactorMap::new(vec![s(&[1, 0]), s(&[0, 1])]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn extend_examples() {
        let (e, h) = extend_jet_to_map(&[s(&[1]), s(&[0, 1])], 3).unwrap();
        assert_eq!(e, 1);
        assert_eq!(h.forms(), &[s(&[1, 0]), s(&[0, 1])]);
        let (e, _) = extend_jet_to_map(&[s(&[1]), s(&[0])], 4).unwrap();
        assert_eq!(e, 0);
        let (e, h) = extend_jet_to_map(&[s(&[1]), s(&[0, 0, 1])], 3).unwrap();
        assert_eq!(e, 2);
        assert_eq!(h.forms(), &[s(&[1, 0, 0]), s(&[0, 0, 1])]);
        assert!(extend_jet_to_map(&[s(&[0]), s(&[0])], 3).is_err());
    }

    #[test]
    fn mobius_examples() {
        let id = mobius_from_3jet(&int(0), &int(1), &int(0)).unwrap();
        assert_eq!(id.forms(), &[s(&[1, 0]), s(&[0, 1])]);
        let m = mobius_from_3jet(&int(0), &int(1), &int(2)).unwrap();
        // t / (1 - t)
        assert_eq!(m.forms(), &[s(&[1, -1]), s(&[0, 1])]);
        let m = mobius_from_3jet(&int(1), &int(1), &int(0)).unwrap();
        assert_eq!(m.forms(), &[s(&[1, 0]), s(&[1, 1])]);
        assert_eq!(
            mobius_from_3jet(&int(1), &int(0), &int(1)),
            Err(Error::NotAnEmbedding)
        );
    }

    #[test]
    fn conic_examples() {
        let std = conic_through_3jet(&[s(&[1]), s(&[0, 1]), s(&[0, 0, 1])]).unwrap();
        assert_eq!(std.forms(), &[s(&[1, 0, 0]), s(&[0, 1, 0]), s(&[0, 0, 1])]);
        let jet = [s(&[1]), s(&[0, 1]), s(&[0, 1, 1])];
        let c = conic_through_3jet(&jet).unwrap();
        assert!(jets_match(&c.series(3), &jet, 3));
        assert!(matches!(
            conic_through_3jet(&[s(&[1]), s(&[0, 1]), s(&[0, 2])]),
            Err(Error::DegenerateJet(_))
        ));
    }

    #[test]
    fn conic_is_smooth_member_of_the_pencil() {
        // oracle: the 3x6 system on conic coefficients; the image conic's
        // equation must be in its kernel and have nonzero determinant
        let jet = [s(&[1, 2]), s(&[0, 1, 3]), s(&[2, 1, 1])];
        let c = conic_through_3jet(&jet).unwrap();
        let ker = conics_through_3jet(&jet).unwrap();
        assert_eq!(ker.len(), 3);
        // find the conic vanishing on 5 points of the image
        let pts: Vec<Vec<BigRational>> = (0..6).map(|u| c.eval(&int(1), &int(u))).collect();
        let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        let rows: Vec<Vec<BigRational>> = pts
            .iter()
            .map(|x| pairs.iter().map(|&(i, j)| &x[i] * &x[j]).collect())
            .collect();
        let eq = kernel_basis(&Matrix::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(eq.len(), 1);
        assert!(solve_in_span(&eq[0], &ker, 0.0).unwrap().is_some());
        let q = &eq[0];
        let two = int(2);
        let m = Matrix::from_rows(&[
            vec![&q[0] * &two, q[1].clone(), q[2].clone()],
            vec![q[1].clone(), &q[3] * &two, q[4].clone()],
            vec![q[2].clone(), q[4].clone(), &q[5] * &two],
        ])
        .unwrap();
        assert_eq!(bareiss_rank(&m), 3);
    }

    #[test]
    fn curve_through_jet3_multidegrees() {
        let f = Format::segre_p1(4).unwrap();
        let diag = JetScheme::new(f, 3, vec![vec![s(&[1]), s(&[0, 1])]; 4]).unwrap();
        let h = curve_through_jet3(&diag).unwrap();
        assert_eq!(h.multidegree(), vec![1, 1, 1, 1]);
        assert_eq!(h.embedded_degree(), 4);
        let f = Format::segre_p1(3).unwrap();
        let z = JetScheme::new(
            f,
            3,
            vec![
                vec![s(&[1]), s(&[0, 0, 1])],
                vec![s(&[1]), s(&[0, 1])],
                vec![s(&[1]), s(&[0, 1])],
            ],
        )
        .unwrap();
        let h = curve_through_jet3(&z).unwrap();
        assert_eq!(h.multidegree(), vec![2, 1, 1]);
        for i in 0..3 {
            assert!(jets_match(&h.factors()[i].series(3), &z.factors()[i], 3));
        }
        let f = Format::new(vec![2, 1], vec![1, 1]).unwrap();
        let z = JetScheme::new(
            f,
            3,
            vec![
                vec![s(&[1]), s(&[0, 1]), s(&[0, 0, 1])],
                vec![s(&[1, 1]), s(&[0, 1, 5])],
            ],
        )
        .unwrap();
        let h = curve_through_jet3(&z).unwrap();
        assert_eq!(h.multidegree(), vec![2, 1]);
        assert!(jets_match(&h.factors()[1].series(3), &z.factors()[1], 3));
        let f = Format::segre_p1(2).unwrap();
        let z = JetScheme::new(
            f,
            3,
            vec![vec![s(&[1]), s(&[0, 1])], vec![s(&[1]), s(&[2])]],
        )
        .unwrap();
        assert_eq!(
            curve_through_jet3(&z),
            Err(Error::AutarkyViolation { factor: 2 })
        );
    }

    #[test]
    fn mobius_in_a_line_of_p2() {
        // jet (1, t + t^2, 2t + 2t^2) lies in a line of P^2
        let f = Format::new(vec![2], vec![1]).unwrap();
        let z = JetScheme::new(f, 3, vec![vec![s(&[1]), s(&[0, 1, 1]), s(&[0, 2, 2])]]).unwrap();
        let h = curve_through_jet3(&z).unwrap();
        assert_eq!(h.multidegree(), vec![1]);
        assert!(jets_match(&h.factors()[0].series(3), &z.factors()[0], 3));
    }

    #[test]
    fn linearize_examples() {
        let lin = linearize(&diagonal(2));
        assert_eq!(lin.degree, 2);
        assert_eq!(lin.rank(), 3);
        assert_eq!(lin.matrix.column(1), s(&[0, 1, 1, 0]));
        let f = Format::new(vec![2], vec![3]).unwrap();
        let conic = CurveMap::new(
            f.clone(),
            vec![FactorMap::new(vec![s(&[1, 0, 0]), s(&[0, 1, 0]), s(&[0, 0, 1])]).unwrap()],
        )
        .unwrap();
        let lin = linearize(&conic);
        assert_eq!((lin.degree, lin.rank()), (6, 7));
        let k = CurveMap::new(
            f,
            vec![FactorMap::constant(&[int(1), int(2), int(3)]).unwrap()],
        )
        .unwrap();
        assert_eq!(linearize(&k).rank(), 1);
    }

    #[test]
    fn linearization_is_an_identity() {
        let f = Format::new(vec![1, 2], vec![2, 1]).unwrap();
        let h = CurveMap::new(
            f.clone(),
            vec![
                FactorMap::new(vec![s(&[1, 1]), s(&[2, -1])]).unwrap(),
                FactorMap::new(vec![s(&[1, 0, 1]), s(&[0, 3, 0]), s(&[1, 1, 1])]).unwrap(),
            ],
        )
        .unwrap();
        let lin = linearize(&h);
        for u in [-2i64, 0, 3] {
            let u = int(u);
            let lhs = embed(&f, &h.point_at(&u)).unwrap().coeffs;
            let pows: Vec<BigRational> = (0..=lin.degree)
                .map(|m| num_traits::pow(u.clone(), m))
                .collect();
            assert_eq!(lhs, lin.matrix.mul_vec(&pows));
        }
        // point at infinity
        let lhs = embed(&f, &h.eval(&int(0), &int(1))).unwrap().coeffs;
        assert_eq!(lhs, lin.matrix.column(lin.degree));
    }

    #[test]
    fn substitution_detection() {
        let f = Format::new(vec![1], vec![1]).unwrap();
        let h = CurveMap::new(
            f,
            vec![FactorMap::new(vec![s(&[1, 0, 0]), s(&[0, 0, 1])]).unwrap()],
        )
        .unwrap();
        assert_eq!(h.substitution_exponent(), 2);
        let (k, r) = h.remove_substitution();
        assert_eq!((k, r.multidegree()), (2, vec![1]));
        assert_eq!(diagonal(3).substitution_exponent(), 1);
    }

    #[test]
    fn base_points_rejected() {
        let f = Format::new(vec![1], vec![1]).unwrap();
        assert!(CurveMap::new(
            f,
            vec![FactorMap::new(vec![s(&[1, 1]), s(&[1, 1])]).unwrap()]
        )
        .is_err());
    }

    fn twisted_cubic() -> CurveMap {
        let f = Format::new(vec![1], vec![3]).unwrap();
        CurveMap::new(
            f,
            vec![FactorMap::new(vec![s(&[1, 0]), s(&[0, 1])]).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn section_of_curve_point_has_size_one() {
        let h = twisted_cubic();
        let p = embed(h.format(), &h.point_at(&rat(2, 3))).unwrap();
        let curve = PiecewiseCurve::new(vec![h]).unwrap();
        let d = hyperplane_section_decompose(&curve, &p, 1, DEFAULT_RETRIES, 1e-9).unwrap();
        assert_eq!(d.decomposition.size(), 1);
    }

    #[test]
    fn section_of_generic_point_on_cubic() {
        let h = twisted_cubic();
        let p = PSTensor::new(h.format().clone(), s(&[3, -1, 4, 1])).unwrap();
        let curve = PiecewiseCurve::new(vec![h.clone()]).unwrap();
        let d = hyperplane_section_decompose(&curve, &p, 5, DEFAULT_RETRIES, 1e-9).unwrap();
        assert!(d.decomposition.size() <= 3);
        verify_numeric(&p.to_complex(), &d.decomposition, DEFAULT_VERIFY_TOL).unwrap();
        for (term, (_, s0, t0)) in d.decomposition.terms.iter().zip(&d.params) {
            assert!(term.point.projectively_eq(&h.eval(s0, t0), 1e-9));
        }
    }

    #[test]
    fn section_rejects_points_off_the_span() {
        let f = Format::segre_p1(2).unwrap();
        let h = diagonal(2);
        let curve = PiecewiseCurve::new(vec![h]).unwrap();
        let p = PSTensor::new(f, s(&[0, 1, -1, 0])).unwrap();
        assert!(matches!(
            hyperplane_section_decompose(&curve, &p, 0, 4, 1e-9),
            Err(Error::NotInSpan)
        ));
    }

    #[test]
    fn section_on_two_lines() {
        // two lines through (e0, e0) in (P^1)^2: L1 moves factor 1, L2 factor 2
        let f = Format::segre_p1(2).unwrap();
        let l1 = CurveMap::new(
            f.clone(),
            vec![
                FactorMap::new(vec![s(&[1, 0]), s(&[0, 1])]).unwrap(),
                FactorMap::constant(&[int(1), int(0)]).unwrap(),
            ],
        )
        .unwrap();
        let l2 = CurveMap::new(
            f.clone(),
            vec![
                FactorMap::constant(&[int(1), int(0)]).unwrap(),
                FactorMap::new(vec![s(&[1, 0]), s(&[0, 1])]).unwrap(),
            ],
        )
        .unwrap();
        let p = PSTensor::new(f, s(&[1, 2, 3, 0])).unwrap();
        let curve = PiecewiseCurve::new(vec![l1, l2]).unwrap();
        let d = hyperplane_section_decompose(&curve, &p, 3, DEFAULT_RETRIES, 1e-9).unwrap();
        assert!(d.decomposition.size() <= 2);
        verify_numeric(&p.to_complex(), &d.decomposition, DEFAULT_VERIFY_TOL).unwrap();
    }
}
