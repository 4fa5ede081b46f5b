use num_rational::BigRational;
use num_traits::Zero;

use super::autarky::autarky_reduce;
use super::certificate::{bound_sigma3, certify, EngineOptions, EngineOutput, TermCollector};
use super::presentation::{tangent_support, BorderPresentation, TangentPresentation};
use super::{multiple_of_point, tensor};
use crate::curves::{
    curve_through_jet3, hyperplane_section_decompose, CurveMap, FactorMap, PiecewiseCurve,
};
use crate::error::{Error, Result};
use crate::linalg::{bareiss_rank, linear_combination, require_in_span, Matrix};
use crate::sylvester::decompose_via_curve;
use crate::tensorspace::{
    embed, flatten, AnyDecomposition, Decomposition, Format, JetScheme, PSTensor, ProductPoint,
    Term,
};

/// The point `x` with `p` proportional to `embed(x)`, if `p` has rank one.
pub fn rank_one_point(p: &PSTensor<BigRational>) -> Result<Option<ProductPoint<BigRational>>> {
    if p.is_zero() {
        return Ok(None);
    }
    let f = &p.format;
    let mut factors = Vec::with_capacity(f.k());
    for i in 0..f.k() {
        let split: Vec<usize> = (0..f.k()).map(|j| usize::from(j == i)).collect();
        let m = flatten(p, &split)?;
        let Some(col) = (0..m.cols())
            .map(|c| m.column(c))
            .find(|c| c.iter().any(|x| !x.is_zero()))
        else {
            return Ok(None);
        };
        factors.push(col);
    }
    let x = ProductPoint::new(factors)?;
    Ok(multiple_of_point(f, &p.coeffs, &x).map(|_| x))
}

fn independent(vectors: &[Vec<BigRational>]) -> Result<bool> {
    Ok(bareiss_rank(&Matrix::from_columns(vectors)?) == vectors.len())
}

fn point_term(
    format: &Format,
    q: &[BigRational],
    x: &ProductPoint<BigRational>,
) -> Result<Term<BigRational>> {
    let coeff = multiple_of_point(format, q, x).ok_or(Error::NotInSpan)?;
    Ok(Term {
        coeff,
        point: x.clone(),
    })
}

/// Decomposes `q` in the span of the tangent line at `support` along
/// `direction`, with exactly `sum_{i in E} d_i` terms (`E` the tangent
/// support) unless `q` is the support point itself.
pub(crate) fn tangent_terms(
    t: &TangentPresentation,
    q: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<AnyDecomposition> {
    let format = &q.format;
    let e = tangent_support(t)?;
    let factors = (0..format.k())
        .map(|i| {
            let o = &t.support.factors[i];
            if e.contains(&i) {
                FactorMap::new(
                    o.iter()
                        .zip(&t.direction[i])
                        .map(|(a, b)| vec![a.clone(), b.clone()])
                        .collect(),
                )
            } else {
                FactorMap::constant(o)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let h = CurveMap::new(format.clone(), factors)?;
    match decompose_via_curve(&h, q, Some(2), &opts.sylvester()) {
        Ok(cd) => Ok(AnyDecomposition::Approx(cd.decomposition)),
        Err(Error::NotMinimal) => {
            let term = point_term(format, &q.coeffs, &t.support)?;
            Ok(AnyDecomposition::Exact(Decomposition::new(
                format.clone(),
                vec![term],
            )?))
        }
        Err(e) => Err(e),
    }
}

/// Decomposes a point of a tangent line; the certificate bound is the exact
/// size `sum_{i in E} d_i`.
pub fn decompose_tangent(
    t: &TangentPresentation,
    p: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<EngineOutput> {
    let e = tangent_support(t)?;
    let bound = e.iter().map(|&i| p.format.degrees()[i]).sum();
    let jet = t.jet(&p.format)?;
    require_in_span(&p.coeffs, &jet.jet_vectors(), 0.0)?;
    let dec = tangent_terms(t, p, opts)?;
    certify(p, dec, "tangent", bound, false, opts)
}

/// `sum y_m v_m` over the jet vectors.
fn combine(
    format: &Format,
    y: &[BigRational],
    vecs: &[Vec<BigRational>],
) -> Result<PSTensor<BigRational>> {
    tensor(format, linear_combination(y, vecs, format.len()))
}

fn last_nonzero(y: &[BigRational]) -> Option<usize> {
    y.iter().rposition(|x| !x.is_zero())
}

/// Terms for `p` in the span of a degree-3 jet, and the route taken.
fn jet3_terms(
    jet: &JetScheme,
    p: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<(AnyDecomposition, String)> {
    let format = &p.format;
    let vecs = jet.jet_vectors();
    if !independent(&vecs)? {
        return Err(Error::InvalidPresentation(
            "the embedded jet is linearly dependent".into(),
        ));
    }
    let y = require_in_span(&p.coeffs, &vecs, 0.0)?;
    match last_nonzero(&y) {
        None => Err(crate::error::invalid("zero tensor")),
        Some(0) => {
            let term = Term {
                coeff: y[0].clone(),
                point: jet.support(),
            };
            Ok((
                AnyDecomposition::Exact(Decomposition::new(format.clone(), vec![term])?),
                "jet3/point".into(),
            ))
        }
        Some(1) => {
            let t = TangentPresentation::from_jet(jet)?;
            Ok((tangent_terms(&t, p, opts)?, "jet3/tangent".into()))
        }
        Some(_) => {
            let red = autarky_reduce(jet)?;
            let pr = red.reduce_target(&y)?;
            let h = curve_through_jet3(&red.jet)?;
            let delta = h.embedded_degree();
            if delta <= 3 {
                return Err(Error::InvalidPresentation(format!(
                    "the jet lies on a curve of degree {delta}, so the point has border rank below 3"
                )));
            }
            let cd = decompose_via_curve(&h, &pr, Some(3), &opts.sylvester())?;
            let dec = red.reembed(&cd.decomposition)?;
            Ok((AnyDecomposition::Approx(dec), "jet3".into()))
        }
    }
}

fn two_tangents_terms(
    v: &JetScheme,
    w: &JetScheme,
    shared: usize,
    p: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<(AnyDecomposition, String, bool)> {
    let format = &p.format;
    let (vv, wv) = (v.jet_vectors(), w.jet_vectors());
    let all: Vec<Vec<BigRational>> = vv.iter().chain(&wv).cloned().collect();
    if !independent(&all)? {
        return Err(Error::InvalidPresentation(
            "the two tangent vectors are linearly dependent".into(),
        ));
    }
    let y = require_in_span(&p.coeffs, &all, 0.0)?;
    let (tv, tw) = (
        TangentPresentation::from_jet(v)?,
        TangentPresentation::from_jet(w)?,
    );
    let pv = combine(format, &y[..2], &vv)?;
    let pw = combine(format, &y[2..], &wv)?;

    let separate = |fallback: bool, route: &str| -> Result<(AnyDecomposition, String, bool)> {
        let mut col = TermCollector::default();
        for (part, t, yy) in [(&pv, &tv, &y[..2]), (&pw, &tw, &y[2..])] {
            if yy.iter().all(Zero::is_zero) {
                continue;
            }
            if yy[1].is_zero() {
                col.push_exact(Term {
                    coeff: yy[0].clone(),
                    point: t.support.clone(),
                });
            } else {
                col.extend_any(tangent_terms(t, part, opts)?);
            }
        }
        Ok((col.finish(format)?, route.to_string(), fallback))
    };
    if y[1].is_zero() || y[3].is_zero() {
        return separate(false, "two-tangents-on-line/degenerate");
    }

    let i_set = tangent_support(&tv)?;
    let j_set = tangent_support(&tw)?;
    let (ov, ow) = (&tv.support, &tw.support);
    let mut comps = Vec::new();
    // the line through both supports, moving only factor `shared`
    let line: Vec<FactorMap> = (0..format.k())
        .map(|j| {
            if j == shared {
                FactorMap::new(
                    ov.factors[j]
                        .iter()
                        .zip(&ow.factors[j])
                        .map(|(a, b)| vec![a.clone(), b.clone()])
                        .collect(),
                )
            } else {
                FactorMap::constant(&ov.factors[j])
            }
        })
        .collect::<Result<_>>()?;
    comps.push(CurveMap::new(format.clone(), line)?);
    for (set, t) in [(&i_set, &tv), (&j_set, &tw)] {
        for &j in set.iter().filter(|&&j| j != shared) {
            let maps: Vec<FactorMap> = (0..format.k())
                .map(|m| {
                    let o = &t.support.factors[m];
                    if m == j {
                        FactorMap::new(
                            o.iter()
                                .zip(&t.direction[m])
                                .map(|(a, b)| vec![a.clone(), b.clone()])
                                .collect(),
                        )
                    } else {
                        FactorMap::constant(o)
                    }
                })
                .collect::<Result<_>>()?;
            comps.push(CurveMap::new(format.clone(), maps)?);
        }
    }
    let curve = PiecewiseCurve::new(comps)?;
    match hyperplane_section_decompose(&curve, p, opts.seed, opts.retries, opts.tol * 0.1) {
        Ok(cd) => Ok((
            AnyDecomposition::Approx(cd.decomposition),
            "two-tangents-on-line".into(),
            false,
        )),
        Err(Error::RetriesExhausted { .. }) | Err(Error::NotInSpan) => {
            separate(true, "two-tangents-on-line/separate")
        }
        Err(e) => Err(e),
    }
}

/// Decomposes `p`, a point in the span of the border presentation `pres`,
/// with at most `2 * sum d_i - 1` terms.
pub fn decompose_sigma3(
    pres: &BorderPresentation,
    p: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<EngineOutput> {
    let format = &p.format;
    pres.validate(format)?;
    if p.is_zero() {
        return Err(crate::error::invalid("zero tensor"));
    }
    let bound = bound_sigma3(format);
    if let Some(x) = rank_one_point(p)? {
        let term = point_term(format, &p.coeffs, &x)?;
        // still insist on the presentation's span, so bad input is reported
        require_in_span(&p.coeffs, &pres.span_vectors(format)?, 0.0)?;
        let dec = AnyDecomposition::Exact(Decomposition::new(format.clone(), vec![term])?);
        return certify(p, dec, "rank-one", bound, false, opts);
    }
    let (dec, route, fallback) = match pres {
        BorderPresentation::ThreePoints { points } => {
            let vecs: Vec<Vec<BigRational>> = points
                .iter()
                .map(|x| embed(format, x).map(|e| e.coeffs))
                .collect::<Result<_>>()?;
            let y = require_in_span(&p.coeffs, &vecs, 0.0)?;
            let mut col = TermCollector::default();
            for (c, x) in y.into_iter().zip(points) {
                col.push_exact(Term {
                    coeff: c,
                    point: x.clone(),
                });
            }
            (col.finish(format)?, "three-points".to_string(), false)
        }
        BorderPresentation::PointPlusTangent { point, jet } => {
            let mut vecs = vec![embed(format, point)?.coeffs];
            let jv = jet.jet_vectors();
            vecs.extend(jv.iter().cloned());
            if !independent(&vecs)? {
                return Err(Error::InvalidPresentation(
                    "point and tangent are linearly dependent".into(),
                ));
            }
            let y = require_in_span(&p.coeffs, &vecs, 0.0)?;
            let mut col = TermCollector::default();
            col.push_exact(Term {
                coeff: y[0].clone(),
                point: point.clone(),
            });
            let t = TangentPresentation::from_jet(jet)?;
            if !y[2].is_zero() {
                let q = combine(format, &y[1..], &jv)?;
                col.extend_any(tangent_terms(&t, &q, opts)?);
            } else {
                col.push_exact(Term {
                    coeff: y[1].clone(),
                    point: t.support.clone(),
                });
            }
            (col.finish(format)?, "point-plus-tangent".to_string(), false)
        }
        BorderPresentation::Jet3 { jet } => {
            let (d, r) = jet3_terms(jet, p, opts)?;
            (d, r, false)
        }
        BorderPresentation::TwoTangentsOnLine {
            v,
            w,
            shared_factor,
        } => two_tangents_terms(v, w, *shared_factor, p, opts)?,
    };
    certify(p, dec, &route, bound, fallback, opts)
}
