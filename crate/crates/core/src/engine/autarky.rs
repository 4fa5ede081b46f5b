use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::linalg::{bareiss_rank, linear_combination, require_in_span, Matrix};
use crate::poly::{series_mul, series_pow};
use crate::scalar::Scalar;
use crate::tensorspace::{Decomposition, Format, JetScheme, PSTensor, ProductPoint, Series, Term};

/// A factor kept by the reduction, restricted to the span of its projection:
/// original coordinates are `basis * reduced coordinates`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeptFactor {
    pub original: usize,
    /// Columns spanning the projection; `None` when the span is the whole factor.
    pub basis: Option<Vec<Vec<BigRational>>>,
}

/// Shrinks every factor to the span of the jet's projection and drops the
/// factors along which the jet is constant; rank is unchanged by this.
#[derive(Debug, Clone, PartialEq)]
pub struct AutarkyReduction {
    pub original: Format,
    pub reduced: Format,
    pub kept: Vec<KeptFactor>,
    /// Dropped factor index and its fixed point.
    pub dropped: Vec<(usize, Vec<BigRational>)>,
    /// The jet in reduced coordinates.
    pub jet: JetScheme,
    /// Scalar series absorbed from the dropped factors, `prod phi_i^{d_i}`.
    pub weight: Series,
}

fn greedy_basis(vectors: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    for v in vectors {
        let mut cand = basis.clone();
        cand.push(v.clone());
        if bareiss_rank(&Matrix::from_columns(&cand).expect("uniform lengths")) == cand.len() {
            basis = cand;
        }
    }
    basis
}

pub fn autarky_reduce(jet: &JetScheme) -> Result<AutarkyReduction> {
    let format = jet.format();
    let c = jet.order();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut new_factors = Vec::new();
    let mut dims = Vec::new();
    let mut degs = Vec::new();
    let mut weight: Series = vec![BigRational::zero(); c];
    weight[0] = BigRational::one();
    for i in 0..format.k() {
        let fj = jet.project_factor(i)?;
        if fj.local_degree() == 1 {
            let o: Vec<BigRational> = fj.coords.iter().map(|s| s[0].clone()).collect();
            let r = fj
                .unit_coordinate()
                .expect("jet factors have a unit coordinate");
            let phi: Series = fj.coords[r].iter().map(|x| x / &o[r]).collect();
            weight = series_mul(&weight, &series_pow(&phi, format.degrees()[i], c), c);
            dropped.push((i, o));
            continue;
        }
        let taylor = fj.taylor_vectors();
        let basis = greedy_basis(&taylor);
        if basis.len() == format.dims()[i] + 1 {
            kept.push(KeptFactor {
                original: i,
                basis: None,
            });
            new_factors.push(fj.coords.clone());
            dims.push(format.dims()[i]);
        } else {
            let mut coords: Vec<Series> = vec![vec![BigRational::zero(); c]; basis.len()];
            for (m, f) in taylor.iter().enumerate() {
                let x = require_in_span(f, &basis, 0.0)?;
                for (j, v) in x.into_iter().enumerate() {
                    coords[j][m] = v;
                }
            }
            dims.push(basis.len() - 1);
            new_factors.push(coords);
            kept.push(KeptFactor {
                original: i,
                basis: Some(basis),
            });
        }
        degs.push(format.degrees()[i]);
    }
    if kept.is_empty() {
        return Err(Error::InvalidPresentation(
            "the jet is constant in every factor".into(),
        ));
    }
    let reduced = Format::new(dims, degs)?;
    let jet = JetScheme::new(reduced.clone(), c, new_factors)?;
    Ok(AutarkyReduction {
        original: format.clone(),
        reduced,
        kept,
        dropped,
        jet,
        weight,
    })
}

impl AutarkyReduction {
    pub fn is_identity(&self) -> bool {
        self.dropped.is_empty() && self.kept.iter().all(|k| k.basis.is_none())
    }

    /// The reduced tensor corresponding to `sum y_m v_m`, where `v_m` are the
    /// original jet vectors.
    pub fn reduce_target(&self, y: &[BigRational]) -> Result<PSTensor<BigRational>> {
        if y.len() != self.jet.order() {
            return Err(invalid("jet coordinates do not match the jet order"));
        }
        let vecs = self.jet.jet_vectors_weighted(&self.weight);
        PSTensor::new(
            self.reduced.clone(),
            linear_combination(y, &vecs, self.reduced.len()),
        )
    }

    pub fn reembed_point<T: Scalar>(&self, x: &ProductPoint<T>) -> ProductPoint<T> {
        let mut factors: Vec<Option<Vec<T>>> = vec![None; self.original.k()];
        for (kf, xi) in self.kept.iter().zip(&x.factors) {
            factors[kf.original] = Some(match &kf.basis {
                None => xi.clone(),
                Some(b) => {
                    let bt: Vec<Vec<T>> = b
                        .iter()
                        .map(|col| col.iter().map(T::from_rational).collect())
                        .collect();
                    linear_combination(xi, &bt, b[0].len())
                }
            });
        }
        for (i, o) in &self.dropped {
            factors[*i] = Some(o.iter().map(T::from_rational).collect());
        }
        ProductPoint {
            factors: factors
                .into_iter()
                .map(|f| f.expect("every factor accounted for"))
                .collect(),
        }
    }

    /// Maps a decomposition of the reduced tensor back to the original
    /// format; coefficients are unchanged.
    pub fn reembed<T: Scalar>(&self, dec: &Decomposition<T>) -> Result<Decomposition<T>> {
        let terms = dec
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff.clone(),
                point: self.reembed_point(&t.point),
            })
            .collect();
        Decomposition::new(self.original.clone(), terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::tensorspace::embed;

    fn s(v: &[i64]) -> Series {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn lines_in_p3_reduce_to_p1() {
        let f = Format::new(vec![3; 4], vec![1; 4]).unwrap();
        let factor = vec![s(&[1]), s(&[0, 1]), s(&[0, 2]), s(&[0])];
        let jet = JetScheme::new(f, 3, vec![factor; 4]).unwrap();
        let red = autarky_reduce(&jet).unwrap();
        assert_eq!(red.reduced, Format::segre_p1(4).unwrap());
        assert!(red.dropped.is_empty());
    }

    #[test]
    fn constant_factor_is_dropped_and_round_trips() {
        let f = Format::new(vec![1, 1, 2], vec![1, 2, 1]).unwrap();
        let jet = JetScheme::new(
            f.clone(),
            3,
            vec![
                vec![s(&[1]), s(&[0, 1])],
                vec![s(&[2, 1]), s(&[1, 0, 3])],
                vec![s(&[1, 1]), s(&[2, 2]), s(&[3, 3])],
            ],
        )
        .unwrap();
        let red = autarky_reduce(&jet).unwrap();
        assert_eq!(red.dropped.len(), 1);
        assert_eq!(red.reduced, Format::new(vec![1, 1], vec![1, 2]).unwrap());
        assert!(red
            .reembed_point(&red.jet.support())
            .projectively_eq(&jet.support(), 0.0));
        // sum y_m v_m and the re-embedded reduced target agree on rank-one targets
        let y = vec![int(2), int(0), int(0)];
        let p = linear_combination(&y, &jet.jet_vectors(), f.len());
        let pr = red.reduce_target(&y).unwrap();
        let e = embed(&red.reduced, &red.jet.support()).unwrap();
        let r = &pr.coeffs[0] / &e.coeffs[0];
        let back = embed(&f, &red.reembed_point(&red.jet.support())).unwrap();
        let scaled: Vec<BigRational> = back.coeffs.iter().map(|c| c * &r).collect();
        assert_eq!(scaled, p);
    }

    #[test]
    fn identity_when_already_reduced() {
        let f = Format::segre_p1(2).unwrap();
        let jet = JetScheme::new(f, 3, vec![vec![s(&[1]), s(&[0, 1])]; 2]).unwrap();
        assert!(autarky_reduce(&jet).unwrap().is_identity());
    }
}
