use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::linalg::{bareiss_rank, Matrix};
use crate::tensorspace::format::proportional;
use crate::tensorspace::{embed, Format, JetScheme, ProductPoint};

/// The border-rank-3 scheme types a point of the third secant variety can be
/// presented by.
#[derive(Debug, Clone, PartialEq)]
pub enum BorderPresentation {
    /// Three distinct points.
    ThreePoints {
        points: Vec<ProductPoint<BigRational>>,
    },
    /// A simple point and a tangent vector (order-2 jet) elsewhere.
    PointPlusTangent {
        point: ProductPoint<BigRational>,
        jet: JetScheme,
    },
    /// A connected curvilinear scheme of degree 3.
    Jet3 { jet: JetScheme },
    /// Two tangent vectors whose supports span a line of multidegree `e_i`
    /// (`shared_factor` is the 0-based `i`, and `d_i = 1`).
    TwoTangentsOnLine {
        v: JetScheme,
        w: JetScheme,
        shared_factor: usize,
    },
}

impl BorderPresentation {
    pub fn kind(&self) -> &'static str {
        match self {
            BorderPresentation::ThreePoints { .. } => "three-points",
            BorderPresentation::PointPlusTangent { .. } => "point-plus-tangent",
            BorderPresentation::Jet3 { .. } => "jet3",
            BorderPresentation::TwoTangentsOnLine { .. } => "two-tangents-on-line",
        }
    }

    /// Checks the structural invariants against `format`.
    pub fn validate(&self, format: &Format) -> Result<()> {
        match self {
            BorderPresentation::ThreePoints { points } => {
                if points.len() != 3 {
                    return Err(invalid(format!(
                        "three-point presentation has {} points",
                        points.len()
                    )));
                }
                for x in points {
                    x.check_format(format)?;
                }
                for a in 0..3 {
                    for b in a + 1..3 {
                        if points[a].projectively_eq(&points[b], 0.0) {
                            return Err(Error::InvalidPresentation(format!(
                                "points {} and {} coincide",
                                a + 1,
                                b + 1
                            )));
                        }
                    }
                }
            }
            BorderPresentation::PointPlusTangent { point, jet } => {
                point.check_format(format)?;
                check_jet(jet, format, 2)?;
                if point.projectively_eq(&jet.support(), 0.0) {
                    return Err(Error::InvalidPresentation(
                        "the point coincides with the tangent support".into(),
                    ));
                }
            }
            BorderPresentation::Jet3 { jet } => check_jet(jet, format, 3)?,
            BorderPresentation::TwoTangentsOnLine {
                v,
                w,
                shared_factor,
            } => {
                check_jet(v, format, 2)?;
                check_jet(w, format, 2)?;
                let i = *shared_factor;
                format.check_factor(i)?;
                if format.degrees()[i] != 1 {
                    return Err(Error::InvalidPresentation(format!(
                        "the line lies in factor {} which has degree {}, expected 1",
                        i + 1,
                        format.degrees()[i]
                    )));
                }
                let (ov, ow) = (v.support(), w.support());
                for j in 0..format.k() {
                    let same = proportional(&ov.factors[j], &ow.factors[j], 0.0);
                    if (j == i) == same {
                        return Err(Error::InvalidPresentation(format!(
                            "supports must differ exactly in factor {}",
                            i + 1
                        )));
                    }
                }
                // tangent directions in factor i stay on the line
                let line = [ov.factors[i].clone(), ow.factors[i].clone()];
                for jet in [v, w] {
                    let dir: Vec<BigRational> =
                        jet.factors()[i].iter().map(|s| s[1].clone()).collect();
                    let m = Matrix::from_columns(&[line[0].clone(), line[1].clone(), dir])?;
                    if bareiss_rank(&m) > 2 {
                        return Err(Error::InvalidPresentation(format!(
                            "tangent direction in factor {} leaves the line through the supports",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Vectors spanning the linear span of the embedded scheme.
    pub fn span_vectors(&self, format: &Format) -> Result<Vec<Vec<BigRational>>> {
        Ok(match self {
            BorderPresentation::ThreePoints { points } => points
                .iter()
                .map(|x| embed(format, x).map(|e| e.coeffs))
                .collect::<Result<_>>()?,
            BorderPresentation::PointPlusTangent { point, jet } => {
                let mut v = vec![embed(format, point)?.coeffs];
                v.extend(jet.jet_vectors());
                v
            }
            BorderPresentation::Jet3 { jet } => jet.jet_vectors(),
            BorderPresentation::TwoTangentsOnLine { v, w, .. } => {
                let mut out = v.jet_vectors();
                out.extend(w.jet_vectors());
                out
            }
        })
    }
}

fn check_jet(jet: &JetScheme, format: &Format, order: usize) -> Result<()> {
    if jet.format() != format {
        return Err(invalid("jet format differs from the tensor format"));
    }
    if jet.order() != order {
        return Err(invalid(format!(
            "expected a jet of order {order}, got {}",
            jet.order()
        )));
    }
    Ok(())
}

/// A point of a tangent line: support `o` and direction `w`, per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPresentation {
    pub support: ProductPoint<BigRational>,
    pub direction: Vec<Vec<BigRational>>,
}

impl TangentPresentation {
    pub fn new(
        support: ProductPoint<BigRational>,
        direction: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        if direction.len() != support.factors.len()
            || direction
                .iter()
                .zip(&support.factors)
                .any(|(w, o)| w.len() != o.len())
        {
            return Err(invalid(
                "tangent direction does not match the support shape",
            ));
        }
        Ok(TangentPresentation { support, direction })
    }

    /// The tangent vector of an order-2 jet.
    pub fn from_jet(jet: &JetScheme) -> Result<Self> {
        if jet.order() < 2 {
            return Err(invalid("a tangent needs a jet of order at least 2"));
        }
        let direction = jet
            .factors()
            .iter()
            .map(|f| f.iter().map(|s| s[1].clone()).collect())
            .collect();
        TangentPresentation::new(jet.support(), direction)
    }

    /// The order-2 jet `o + t w`.
    pub fn jet(&self, format: &Format) -> Result<JetScheme> {
        let factors = self
            .support
            .factors
            .iter()
            .zip(&self.direction)
            .map(|(o, w)| {
                o.iter()
                    .zip(w)
                    .map(|(a, b)| vec![a.clone(), b.clone()])
                    .collect()
            })
            .collect();
        JetScheme::new(format.clone(), 2, factors)
    }
}

/// Factors in which the direction is not a multiple of the support.
pub fn tangent_support(t: &TangentPresentation) -> Result<Vec<usize>> {
    let e: Vec<usize> = (0..t.support.factors.len())
        .filter(|&i| {
            let w = &t.direction[i];
            !w.iter().all(Zero::is_zero) && !proportional(w, &t.support.factors[i], 0.0)
        })
        .collect();
    if e.is_empty() {
        return Err(Error::NotATangent);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn v(x: &[i64]) -> Vec<BigRational> {
        x.iter().map(|&a| int(a)).collect()
    }

    fn t(o: &[&[i64]], w: &[&[i64]]) -> TangentPresentation {
        TangentPresentation::new(
            ProductPoint::new(o.iter().map(|x| v(x)).collect()).unwrap(),
            w.iter().map(|x| v(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn support_sets() {
        let o: &[&[i64]] = &[&[1, 0], &[1, 0], &[1, 0]];
        assert_eq!(
            tangent_support(&t(o, &[&[0, 1], &[0, 1], &[0, 1]])).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(
            tangent_support(&t(o, &[&[2, 0], &[0, 1], &[0, 0]])).unwrap(),
            vec![1]
        );
        assert_eq!(
            tangent_support(&t(o, &[&[2, 0], &[1, 0], &[0, 0]])),
            Err(Error::NotATangent)
        );
    }

    #[test]
    fn two_tangents_validation() {
        let f = Format::segre_p1(3).unwrap();
        let jet = |o: [[i64; 2]; 3], w: [[i64; 2]; 3]| {
            JetScheme::new(
                f.clone(),
                2,
                (0..3)
                    .map(|i| vec![v(&[o[i][0], w[i][0]]), v(&[o[i][1], w[i][1]])])
                    .collect(),
            )
            .unwrap()
        };
        let a = jet([[1, 0], [1, 0], [1, 0]], [[0, 1], [0, 1], [0, 1]]);
        let b = jet([[0, 1], [1, 0], [1, 0]], [[1, 0], [0, 1], [0, 0]]);
        let p = BorderPresentation::TwoTangentsOnLine {
            v: a.clone(),
            w: b.clone(),
            shared_factor: 0,
        };
        p.validate(&f).unwrap();
        let bad = BorderPresentation::TwoTangentsOnLine {
            v: a.clone(),
            w: b,
            shared_factor: 1,
        };
        assert!(matches!(
            bad.validate(&f),
            Err(Error::InvalidPresentation(_))
        ));
        let c = jet([[0, 1], [1, 1], [1, 0]], [[1, 0], [0, 1], [0, 0]]);
        let bad = BorderPresentation::TwoTangentsOnLine {
            v: a,
            w: c,
            shared_factor: 0,
        };
        assert!(bad.validate(&f).is_err());
    }
}
