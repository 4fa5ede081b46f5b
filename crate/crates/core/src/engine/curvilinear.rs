use num_rational::BigRational;
use num_traits::Zero;

use super::certificate::{bound_curvilinear, certify, EngineOptions, EngineOutput, TermCollector};
use super::tensor;
use crate::curves::{extend_jet_to_map, CurveMap};
use crate::error::{invalid, Error, Result};
use crate::linalg::{bareiss_rank, linear_combination, require_in_span, solve_in_span, Matrix};
use crate::sylvester::decompose_via_curve;
use crate::tensorspace::{JetScheme, MultiJet, PSTensor, Term};

/// Smallest order `c'` such that `p` lies in the span of the order-`c'`
/// sub-jet; errors if `p` is outside the span of the whole jet.
pub fn minimalize_presentation(jet: &JetScheme, p: &PSTensor<BigRational>) -> Result<usize> {
    let vecs = jet.jet_vectors();
    for c in 1..=jet.order() {
        if solve_in_span(&p.coeffs, &vecs[..c], 0.0)?.is_some() {
            return Ok(c);
        }
    }
    Err(Error::NotInSpan)
}

/// Decomposes `p` in the span of a curvilinear scheme of degree `c` with
/// `alpha` components, each extended to a rational curve and handled by
/// Sylvester's algorithm. Size is at most `2 alpha + c (sum d_i - 1)`.
pub fn decompose_curvilinear(
    mj: &MultiJet,
    p: &PSTensor<BigRational>,
    opts: &EngineOptions,
) -> Result<EngineOutput> {
    let format = mj.format();
    if format != &p.format {
        return Err(invalid("multi-jet and tensor formats differ"));
    }
    if p.is_zero() {
        return Err(invalid("zero tensor"));
    }
    let mut all = Vec::new();
    let mut per: Vec<Vec<Vec<BigRational>>> = Vec::new();
    for (j, comp) in mj.components().iter().enumerate() {
        let vecs = comp.jet_vectors();
        if bareiss_rank(&Matrix::from_columns(&vecs)?) != comp.order() {
            return Err(Error::IndependenceFailure { component: j + 1 });
        }
        all.extend(vecs.iter().cloned());
        per.push(vecs);
    }
    let y = require_in_span(&p.coeffs, &all, 0.0)?;
    let mut col = TermCollector::default();
    let mut kappa = 1;
    let mut offset = 0;
    for (comp, vecs) in mj.components().iter().zip(&per) {
        let yj = &y[offset..offset + comp.order()];
        offset += comp.order();
        let Some(last) = yj.iter().rposition(|x| !x.is_zero()) else {
            continue;
        };
        if last == 0 {
            col.push_exact(Term {
                coeff: yj[0].clone(),
                point: comp.support(),
            });
            continue;
        }
        let c = last + 1;
        let sub = comp.truncate(c)?;
        let maps = sub
            .factors()
            .iter()
            .map(|f| extend_jet_to_map(f, c).map(|(_, m)| m))
            .collect::<Result<Vec<_>>>()?;
        let h = CurveMap::new(format.clone(), maps)?;
        kappa = kappa.max(h.substitution_exponent());
        let pj = tensor(format, linear_combination(yj, vecs, format.len()))?;
        let cd = decompose_via_curve(&h, &pj, Some(c), &opts.sylvester())?;
        col.extend_approx(cd.decomposition);
    }
    let bound = bound_curvilinear(format, mj.degree(), mj.alpha())
        .expect("every component has positive order");
    let mut out = certify(p, col.finish(format)?, "curvilinear", bound, false, opts)?;
    out.certificate.substitution_exponent = Some(kappa);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::tensorspace::{Format, Series};

    fn s(x: &[i64]) -> Series {
        x.iter().map(|&a| int(a)).collect()
    }

    fn diagonal_jet(k: usize, order: usize) -> JetScheme {
        let f = Format::segre_p1(k).unwrap();
        let mut t = vec![int(0); order];
        t[1] = int(1);
        let mut one = vec![int(0); order];
        one[0] = int(1);
        JetScheme::new(f, order, vec![vec![one, t]; k]).unwrap()
    }

    #[test]
    fn diagonal_jet_generic_vs_tangent_developable() {
        let jet = diagonal_jet(3, 3);
        let f = jet.format().clone();
        let mj = MultiJet::new(vec![jet.clone()]).unwrap();
        let vecs = jet.jet_vectors();
        let generic = tensor(
            &f,
            linear_combination(&[int(1), int(1), int(1)], &vecs, f.len()),
        )
        .unwrap();
        let out = decompose_curvilinear(&mj, &generic, &EngineOptions::default()).unwrap();
        assert_eq!(out.decomposition.size(), 2);
        // jet coordinates (1, 2t/3, t^2/3) of the tangent developable
        let t0 = int(3);
        let y = vec![int(1), rat(2, 3) * &t0, &t0 * &t0 / int(3)];
        let dev = tensor(&f, linear_combination(&y, &vecs, f.len())).unwrap();
        let out = decompose_curvilinear(&mj, &dev, &EngineOptions::default()).unwrap();
        assert_eq!(out.decomposition.size(), 3);
        assert!(out.certificate.residual < 1e-8);
    }

    #[test]
    fn two_components() {
        let a = diagonal_jet(2, 2);
        let f = a.format().clone();
        let b = JetScheme::new(f.clone(), 2, vec![vec![s(&[0, 1]), s(&[1, 2])]; 2]).unwrap();
        let mj = MultiJet::new(vec![a.clone(), b.clone()]).unwrap();
        let mut vecs = a.jet_vectors();
        vecs.extend(b.jet_vectors());
        let p = tensor(
            &f,
            linear_combination(&[int(1), int(2), int(-1), int(1)], &vecs, f.len()),
        )
        .unwrap();
        let out = decompose_curvilinear(&mj, &p, &EngineOptions::default()).unwrap();
        assert!(out.decomposition.size() <= out.certificate.bound);
        assert!(out.certificate.residual < 1e-8);
    }

    #[test]
    fn minimal_order() {
        let jet = diagonal_jet(2, 3);
        let f = jet.format().clone();
        let vecs = jet.jet_vectors();
        let p = tensor(
            &f,
            linear_combination(&[int(1), int(1)], &vecs[..2], f.len()),
        )
        .unwrap();
        assert_eq!(minimalize_presentation(&jet, &p).unwrap(), 2);
    }

    #[test]
    fn dependent_component_is_reported() {
        // constant jet: vectors repeat
        let f = Format::segre_p1(2).unwrap();
        let jet = JetScheme::new(f, 2, vec![vec![s(&[1]), s(&[0])]; 2]).unwrap();
        let p = tensor(jet.format(), jet.jet_vectors()[0].clone()).unwrap();
        let r = decompose_curvilinear(
            &MultiJet::new(vec![jet]).unwrap(),
            &p,
            &EngineOptions::default(),
        );
        assert_eq!(r.err(), Some(Error::IndependenceFailure { component: 1 }));
    }
}
