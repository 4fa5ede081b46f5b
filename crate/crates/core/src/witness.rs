//! Segre witnesses of border rank 3 with prescribed rank, and explicit
//! rank-3 families converging to a point of a degree-3 jet span.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{decompose_sigma3, BorderPresentation, Certificate, EngineOptions, RankClaim};
use crate::error::{invalid, Error, Result};
use crate::linalg::{linear_combination, require_in_span};
use crate::scalar::{int, norm};
use crate::tensorspace::{
    flattening_report_with, AnyDecomposition, Decomposition, FlatteningReport, Format, JetScheme,
    PSTensor, ProductPoint, Series, Term,
};

/// Nodes of the three curve points in [`border_family`].
pub const FAMILY_NODES: [i64; 3] = [1, -1, 2];

/// The epsilons used for the slope fit attached to witness certificates.
pub const SLOPE_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone)]
pub struct WitnessBundle {
    pub format: Format,
    pub tensor: PSTensor<BigRational>,
    pub presentation: BorderPresentation,
    /// Coordinates of the tensor in the jet vectors.
    pub jet_coords: Vec<BigRational>,
    pub decomposition: AnyDecomposition,
    pub certificate: Certificate,
    pub flattenings: FlatteningReport,
    /// Fixed points of the factors added by padding.
    pub padded_factors: Vec<Vec<BigRational>>,
    /// Decomposition size before padding.
    pub unpadded_size: usize,
}

fn small_nonzero(rng: &mut ChaCha8Rng) -> i64 {
    loop {
        let v = rng.gen_range(-5i64..=5);
        if v != 0 {
            return v;
        }
    }
}

/// A 3-jet at 0 of a Möbius map `t -> (a + b t : c + d t)` with small
/// integer coefficients and `ad - bc != 0`.
fn mobius_jet(rng: &mut ChaCha8Rng) -> Vec<Series> {
    loop {
        let [a, b, c, d]: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-5i64..=5));
        if a * d - b * c != 0 {
            return vec![vec![int(a), int(b), int(0)], vec![int(c), int(d), int(0)]];
        }
    }
}

fn constant_jet(x: &[BigRational]) -> Vec<Series> {
    x.iter()
        .map(|v| vec![v.clone(), BigRational::zero(), BigRational::zero()])
        .collect()
}

/// Builds a tensor on `(P^1)^k` of border rank 3 whose decomposition has `x`
/// terms: a degree-3 jet of a curve of multidegree `(1, ..., 1)` on
/// `(P^1)^(x+1)`, padded with fixed points to `k` factors.
pub fn make_witness(k: usize, x: usize, seed: u64) -> Result<WitnessBundle> {
    if k < 4 || !(3..k).contains(&x) {
        return Err(Error::InvalidRange {
            value: x,
            lo: 3,
            hi: k.saturating_sub(1),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = x + 1;
    let core_factors: Vec<Vec<Series>> = (0..m).map(|_| mobius_jet(&mut rng)).collect();
    let y = vec![
        int(rng.gen_range(-5i64..=5)),
        int(rng.gen_range(-5i64..=5)),
        int(small_nonzero(&mut rng)),
    ];
    let padded_factors: Vec<Vec<BigRational>> = (m..k)
        .map(|_| vec![int(small_nonzero(&mut rng)), int(small_nonzero(&mut rng))])
        .collect();

    let opts = EngineOptions {
        seed,
        ..EngineOptions::default()
    };

    let core_format = Format::segre_p1(m)?;
    let core_jet = JetScheme::new(core_format.clone(), 3, core_factors.clone())?;
    let core_p = PSTensor::new(
        core_format.clone(),
        linear_combination(&y, &core_jet.jet_vectors(), core_format.len()),
    )?;
    let unpadded = decompose_sigma3(&BorderPresentation::Jet3 { jet: core_jet }, &core_p, &opts)?;

    let format = Format::segre_p1(k)?;
    let mut factors = core_factors;
    factors.extend(padded_factors.iter().map(|g| constant_jet(g)));
    let jet = JetScheme::new(format.clone(), 3, factors)?;
    let p = PSTensor::new(
        format.clone(),
        linear_combination(&y, &jet.jet_vectors(), format.len()),
    )?;
    let presentation = BorderPresentation::Jet3 { jet };
    let out = decompose_sigma3(&presentation, &p, &opts)?;
    let flattenings = flattening_report_with(&p, &opts.flattening)?;

    let mut certificate = out.certificate;
    let residuals = SLOPE_EPSILONS
        .iter()
        .map(|&e| border_family(&presentation, &p, e).map(|f| f.residual))
        .collect::<Result<Vec<_>>>()?;
    certificate.border_slope = Some(loglog_slope(&SLOPE_EPSILONS, &residuals));
    let lower = flattenings.max_rank;
    certificate.rank = RankClaim {
        lower,
        upper: certificate.size,
        exact: (lower == certificate.size).then_some(certificate.size),
        note: (certificate.size > lower).then(|| {
            format!("rank = {x} by construction; only the upper bound {x} and border rank 3 are machine-checked")
        }),
    };
    Ok(WitnessBundle {
        format,
        tensor: p,
        presentation,
        jet_coords: y,
        decomposition: out.decomposition,
        certificate,
        flattenings,
        padded_factors,
        unpadded_size: unpadded.decomposition.size(),
    })
}

/// A rank-3 tensor close to `p` and its relative distance `|T - p| / |p|`.
#[derive(Debug, Clone)]
pub struct BorderFamily {
    pub decomposition: Decomposition<BigRational>,
    pub residual: f64,
}

fn eval_series(s: &Series, t: &BigRational) -> BigRational {
    s.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * t + c)
}

/// Three points `f(eps z_j)` of the jet's curve, `z = 1, -1, 2`, with
/// coefficients matching the jet expansion of `p` to second order. The
/// residual is `O(eps)`. A point of the support itself is returned exactly.
pub fn border_family(
    pres: &BorderPresentation,
    p: &PSTensor<BigRational>,
    eps: f64,
) -> Result<BorderFamily> {
    let BorderPresentation::Jet3 { jet } = pres else {
        return Err(invalid("border families need a degree-3 jet presentation"));
    };
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {eps}")));
    }
    let format = jet.format();
    if format != &p.format {
        return Err(invalid("presentation and tensor formats differ"));
    }
    let y = require_in_span(&p.coeffs, &jet.jet_vectors(), 0.0)?;
    if y[1].is_zero() && y[2].is_zero() {
        let dec = Decomposition::new(
            format.clone(),
            vec![Term {
                coeff: y[0].clone(),
                point: jet.support(),
            }],
        )?;
        return Ok(BorderFamily {
            decomposition: dec,
            residual: 0.0,
        });
    }
    let e = BigRational::from_float(eps).ok_or_else(|| invalid("epsilon is not representable"))?;
    let z: Vec<BigRational> = FAMILY_NODES.iter().map(|&v| int(v)).collect();
    // Vandermonde system: sum l_j z_j^m = y_m / eps^m
    let rhs = [y[0].clone(), &y[1] / &e, &y[2] / (&e * &e)];
    let cols: Vec<Vec<BigRational>> = z
        .iter()
        .map(|zj| vec![BigRational::one(), zj.clone(), zj * zj])
        .collect();
    let lambda = require_in_span(&rhs, &cols, 0.0)?;
    let terms: Vec<Term<BigRational>> = z
        .iter()
        .zip(lambda)
        .map(|(zj, l)| {
            let t = &e * zj;
            let factors = jet
                .factors()
                .iter()
                .map(|f| f.iter().map(|s| eval_series(s, &t)).collect())
                .collect();
            Ok(Term {
                coeff: l,
                point: ProductPoint::new(factors)?,
            })
        })
        .collect::<Result<_>>()?;
    let dec = Decomposition {
        format: format.clone(),
        terms,
    };
    let sum = dec.evaluate()?;
    let diff: Vec<BigRational> = sum.iter().zip(&p.coeffs).map(|(a, b)| a - b).collect();
    let residual = norm(&diff) / norm(&p.coeffs);
    Ok(BorderFamily {
        decomposition: dec,
        residual,
    })
}

/// Least-squares slope of `log r` against `log eps`.
pub fn loglog_slope(eps: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = pts.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = pts.iter().map(|(a, _)| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_checked() {
        assert_eq!(
            make_witness(3, 3, 0).err(),
            Some(Error::InvalidRange {
                value: 3,
                lo: 3,
                hi: 2
            })
        );
        assert!(matches!(
            make_witness(5, 5, 0),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            make_witness(5, 2, 0),
            Err(Error::InvalidRange { .. })
        ));
    }

    #[test]
    fn k4_witness_has_rank_three() {
        let w = make_witness(4, 3, 1).unwrap();
        assert_eq!(w.decomposition.size(), 3);
        assert_eq!(w.flattenings.max_rank, 3);
        assert_eq!(w.certificate.rank.exact, Some(3));
        assert!(w.certificate.residual < 1e-8);
        assert!(w.certificate.border_slope.unwrap() >= 0.9);
    }

    #[test]
    fn padding_keeps_the_size() {
        let w = make_witness(6, 4, 3).unwrap();
        assert_eq!(w.decomposition.size(), 4);
        assert_eq!(w.unpadded_size, 4);
        assert_eq!(w.padded_factors.len(), 1);
        assert!(w.certificate.rank.note.is_some());
        assert!(w.flattenings.ranks.iter().all(|r| r.rank <= 3));
    }

    #[test]
    fn family_residual_decays_linearly() {
        let w = make_witness(4, 3, 2).unwrap();
        let res: Vec<f64> = SLOPE_EPSILONS
            .iter()
            .map(|&e| {
                border_family(&w.presentation, &w.tensor, e)
                    .unwrap()
                    .residual
            })
            .collect();
        for pair in res.windows(2) {
            assert!(pair[1] < pair[0], "{res:?}");
            assert!(
                pair[0] / pair[1] <= 10.0 * 4.0 && pair[0] / pair[1] >= 10.0 / 4.0,
                "{res:?}"
            );
        }
        let fam = border_family(&w.presentation, &w.tensor, 1e-3).unwrap();
        assert_eq!(fam.decomposition.size(), 3);
    }

    #[test]
    fn family_on_support_point_is_exact() {
        let w = make_witness(4, 3, 0).unwrap();
        let BorderPresentation::Jet3 { jet } = &w.presentation else {
            unreachable!()
        };
        let p = PSTensor::new(w.format.clone(), jet.jet_vectors()[0].clone()).unwrap();
        let fam = border_family(&w.presentation, &p, 0.5).unwrap();
        assert_eq!(fam.residual, 0.0);
        assert_eq!(fam.decomposition.size(), 1);
        assert!(border_family(&w.presentation, &p, 0.0).is_err());
    }

    #[test]
    fn family_on_tangent_point_decays() {
        let w = make_witness(4, 3, 5).unwrap();
        let BorderPresentation::Jet3 { jet } = &w.presentation else {
            unreachable!()
        };
        let v = jet.jet_vectors();
        let p = PSTensor::new(
            w.format.clone(),
            linear_combination(&[int(1), int(2)], &v[..2], w.format.len()),
        )
        .unwrap();
        let a = border_family(&w.presentation, &p, 1e-2).unwrap().residual;
        let b = border_family(&w.presentation, &p, 1e-3).unwrap().residual;
        assert!(b < a && b < 1e-2);
    }

    #[test]
    fn slope_of_a_line() {
        let e = [1e-1, 1e-2, 1e-3];
        let r: Vec<f64> = e.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&e, &r) - 2.0).abs() < 1e-12);
    }
}
