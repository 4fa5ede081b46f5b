//! Versioned JSON documents (`"schema": "secant3/1"`). Rationals are strings
//! `"n"` or `"n/d"` (decimals accepted on input); complex numbers are
//! `["re", "im"]`. Factor indices are 0-based.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{BorderPresentation, Certificate, TangentPresentation};
use crate::error::{invalid, Result};
use crate::scalar::{format_complex, format_rational, parse_complex, parse_rational};
use crate::sylvester::RncDecomposition;
use crate::tensorspace::{
    AnyDecomposition, Decomposition, Format, JetScheme, MultiJet, PSTensor, ProductPoint, Term,
};
use crate::witness::WitnessBundle;

pub const SCHEMA: &str = "secant3/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatDoc {
    #[serde(default)]
    pub k: Option<usize>,
    pub n: Vec<usize>,
    pub d: Vec<usize>,
}

impl FormatDoc {
    pub fn from_format(f: &Format) -> Self {
        FormatDoc {
            k: Some(f.k()),
            n: f.dims().to_vec(),
            d: f.degrees().to_vec(),
        }
    }

    pub fn to_format(&self) -> Result<Format> {
        if let Some(k) = self.k {
            if k != self.n.len() {
                return Err(invalid(format!(
                    "format declares k = {k} but lists {} dimensions",
                    self.n.len()
                )));
            }
        }
        Format::new(self.n.clone(), self.d.clone())
    }
}

fn rats(v: &[BigRational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn parse_rats(v: &[String]) -> Result<Vec<BigRational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn cplx(v: &[Complex64]) -> Vec<[String; 2]> {
    v.iter().map(format_complex).collect()
}

fn parse_cplx(v: &[[String; 2]]) -> Result<Vec<Complex64>> {
    v.iter().map(|[a, b]| parse_complex(a, b)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDoc {
    pub format: FormatDoc,
    pub coeffs: Vec<String>,
}

impl TensorDoc {
    pub fn from_tensor(p: &PSTensor<BigRational>) -> Self {
        TensorDoc {
            format: FormatDoc::from_format(&p.format),
            coeffs: rats(&p.coeffs),
        }
    }

    pub fn to_tensor(&self) -> Result<PSTensor<BigRational>> {
        PSTensor::new(self.format.to_format()?, parse_rats(&self.coeffs)?)
    }
}

pub type PointDoc = Vec<Vec<String>>;

fn point_doc(x: &ProductPoint<BigRational>) -> PointDoc {
    x.factors.iter().map(|f| rats(f)).collect()
}

fn parse_point(x: &PointDoc) -> Result<ProductPoint<BigRational>> {
    ProductPoint::new(x.iter().map(|f| parse_rats(f)).collect::<Result<_>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetDoc {
    pub format: FormatDoc,
    pub order: usize,
    /// `factors[i][j]` is the series of coordinate `j` of factor `i`.
    pub factors: Vec<Vec<Vec<String>>>,
}

impl JetDoc {
    pub fn from_jet(j: &JetScheme) -> Self {
        JetDoc {
            format: FormatDoc::from_format(j.format()),
            order: j.order(),
            factors: j
                .factors()
                .iter()
                .map(|f| f.iter().map(|s| rats(s)).collect())
                .collect(),
        }
    }

    pub fn to_jet(&self) -> Result<JetScheme> {
        let factors = self
            .factors
            .iter()
            .map(|f| f.iter().map(|s| parse_rats(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        JetScheme::new(self.format.to_format()?, self.order, factors)
    }
}

/// A border presentation, or a tangent presentation (`"kind": "tangent"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PresentationDoc {
    ThreePoints {
        points: Vec<PointDoc>,
    },
    PointPlusTangent {
        point: PointDoc,
        jet: JetDoc,
    },
    Jet3 {
        jet: JetDoc,
    },
    #[serde(rename_all = "camelCase")]
    TwoTangentsOnLine {
        v: JetDoc,
        w: JetDoc,
        shared_factor: usize,
    },
    Tangent {
        support: PointDoc,
        direction: Vec<Vec<String>>,
    },
}

/// Parsed form of [`PresentationDoc`].
#[derive(Debug, Clone, PartialEq)]
pub enum Presentation {
    Border(BorderPresentation),
    Tangent(TangentPresentation),
}

impl PresentationDoc {
    pub fn from_border(p: &BorderPresentation) -> Self {
        match p {
            BorderPresentation::ThreePoints { points } => PresentationDoc::ThreePoints {
                points: points.iter().map(point_doc).collect(),
            },
            BorderPresentation::PointPlusTangent { point, jet } => {
                PresentationDoc::PointPlusTangent {
                    point: point_doc(point),
                    jet: JetDoc::from_jet(jet),
                }
            }
            BorderPresentation::Jet3 { jet } => PresentationDoc::Jet3 {
                jet: JetDoc::from_jet(jet),
            },
            BorderPresentation::TwoTangentsOnLine {
                v,
                w,
                shared_factor,
            } => PresentationDoc::TwoTangentsOnLine {
                v: JetDoc::from_jet(v),
                w: JetDoc::from_jet(w),
                shared_factor: *shared_factor,
            },
        }
    }

    pub fn from_tangent(t: &TangentPresentation) -> Self {
        PresentationDoc::Tangent {
            support: point_doc(&t.support),
            direction: t.direction.iter().map(|w| rats(w)).collect(),
        }
    }

    pub fn parse(&self) -> Result<Presentation> {
        Ok(match self {
            PresentationDoc::ThreePoints { points } => {
                Presentation::Border(BorderPresentation::ThreePoints {
                    points: points.iter().map(parse_point).collect::<Result<_>>()?,
                })
            }
            PresentationDoc::PointPlusTangent { point, jet } => {
                Presentation::Border(BorderPresentation::PointPlusTangent {
                    point: parse_point(point)?,
                    jet: jet.to_jet()?,
                })
            }
            PresentationDoc::Jet3 { jet } => {
                Presentation::Border(BorderPresentation::Jet3 { jet: jet.to_jet()? })
            }
            PresentationDoc::TwoTangentsOnLine {
                v,
                w,
                shared_factor,
            } => Presentation::Border(BorderPresentation::TwoTangentsOnLine {
                v: v.to_jet()?,
                w: w.to_jet()?,
                shared_factor: *shared_factor,
            }),
            PresentationDoc::Tangent { support, direction } => {
                Presentation::Tangent(TangentPresentation::new(
                    parse_point(support)?,
                    direction
                        .iter()
                        .map(|w| parse_rats(w))
                        .collect::<Result<_>>()?,
                )?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiJetDoc {
    pub components: Vec<JetDoc>,
}

impl MultiJetDoc {
    pub fn from_multijet(m: &MultiJet) -> Self {
        MultiJetDoc {
            components: m.components().iter().map(JetDoc::from_jet).collect(),
        }
    }

    pub fn to_multijet(&self) -> Result<MultiJet> {
        MultiJet::new(
            self.components
                .iter()
                .map(JetDoc::to_jet)
                .collect::<Result<_>>()?,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffDoc {
    Exact(String),
    Complex([String; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointAnyDoc {
    Exact(Vec<Vec<String>>),
    Complex(Vec<Vec<[String; 2]>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: CoeffDoc,
    pub point: PointAnyDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub format: FormatDoc,
    /// `"exact"` or `"complex"`.
    pub field: String,
    pub terms: Vec<TermDoc>,
}

impl DecompositionDoc {
    pub fn from_any(d: &AnyDecomposition) -> Self {
        match d {
            AnyDecomposition::Exact(d) => DecompositionDoc {
                format: FormatDoc::from_format(&d.format),
                field: "exact".into(),
                terms: d
                    .terms
                    .iter()
                    .map(|t| TermDoc {
                        coeff: CoeffDoc::Exact(format_rational(&t.coeff)),
                        point: PointAnyDoc::Exact(point_doc(&t.point)),
                    })
                    .collect(),
            },
            AnyDecomposition::Approx(d) => DecompositionDoc {
                format: FormatDoc::from_format(&d.format),
                field: "complex".into(),
                terms: d
                    .terms
                    .iter()
                    .map(|t| TermDoc {
                        coeff: CoeffDoc::Complex(format_complex(&t.coeff)),
                        point: PointAnyDoc::Complex(
                            t.point.factors.iter().map(|f| cplx(f)).collect(),
                        ),
                    })
                    .collect(),
            },
        }
    }

    /// Terms are kept as given (no merging), so a corrupted document stays
    /// corrupted.
    pub fn to_any(&self) -> Result<AnyDecomposition> {
        let format = self.format.to_format()?;
        match self.field.as_str() {
            "exact" => {
                let terms = self
                    .terms
                    .iter()
                    .map(|t| match (&t.coeff, &t.point) {
                        (CoeffDoc::Exact(c), PointAnyDoc::Exact(x)) => Ok(Term {
                            coeff: parse_rational(c)?,
                            point: parse_point(x)?,
                        }),
                        _ => Err(invalid("exact decomposition with a complex entry")),
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_terms(&format, &terms)?;
                Ok(AnyDecomposition::Exact(Decomposition { format, terms }))
            }
            "complex" => {
                let terms = self
                    .terms
                    .iter()
                    .map(|t| {
                        let coeff = match &t.coeff {
                            CoeffDoc::Complex([a, b]) => parse_complex(a, b)?,
                            CoeffDoc::Exact(c) => parse_complex(c, "0")?,
                        };
                        let factors = match &t.point {
                            PointAnyDoc::Complex(x) => {
                                x.iter().map(|f| parse_cplx(f)).collect::<Result<_>>()?
                            }
                            PointAnyDoc::Exact(x) => x
                                .iter()
                                .map(|f| {
                                    f.iter()
                                        .map(|s| parse_complex(s, "0"))
                                        .collect::<Result<Vec<_>>>()
                                })
                                .collect::<Result<_>>()?,
                        };
                        Ok(Term {
                            coeff,
                            point: ProductPoint::new(factors)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                check_terms(&format, &terms)?;
                Ok(AnyDecomposition::Approx(Decomposition { format, terms }))
            }
            other => Err(invalid(format!(
                "unknown field {other:?}, expected \"exact\" or \"complex\""
            ))),
        }
    }
}

fn check_terms<T: crate::Scalar>(format: &Format, terms: &[Term<T>]) -> Result<()> {
    if terms.is_empty() {
        return Err(invalid("decomposition has no terms"));
    }
    terms.iter().try_for_each(|t| t.point.check_format(format))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RncDoc {
    pub a: usize,
    pub params: Vec<[[String; 2]; 2]>,
    pub coeffs: Vec<[String; 2]>,
}

impl RncDoc {
    pub fn from_rnc(r: &RncDecomposition) -> Self {
        RncDoc {
            a: r.a,
            params: r
                .params
                .iter()
                .map(|(s, t)| [format_complex(s), format_complex(t)])
                .collect(),
            coeffs: cplx(&r.coeffs),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessDoc {
    pub schema: String,
    pub format: FormatDoc,
    pub tensor: TensorDoc,
    pub presentation: PresentationDoc,
    pub jet_coords: Vec<String>,
    pub decomposition: DecompositionDoc,
    pub certificate: Certificate,
    pub flattening_ranks: Vec<usize>,
    pub padded_factors: Vec<Vec<String>>,
    pub unpadded_size: usize,
}

impl WitnessDoc {
    pub fn from_bundle(w: &WitnessBundle) -> Self {
        WitnessDoc {
            schema: SCHEMA.into(),
            format: FormatDoc::from_format(&w.format),
            tensor: TensorDoc::from_tensor(&w.tensor),
            presentation: PresentationDoc::from_border(&w.presentation),
            jet_coords: rats(&w.jet_coords),
            decomposition: DecompositionDoc::from_any(&w.decomposition),
            certificate: w.certificate.clone(),
            flattening_ranks: w.flattenings.ranks.iter().map(|r| r.rank).collect(),
            padded_factors: w.padded_factors.iter().map(|g| rats(g)).collect(),
            unpadded_size: w.unpadded_size,
        }
    }
}

/// Rejects documents declaring a schema other than [`SCHEMA`]; documents
/// without a `schema` key are accepted.
pub fn check_schema(v: &Value) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == SCHEMA => Ok(()),
        Some(other) => Err(invalid(format!(
            "unsupported schema {other}, expected {SCHEMA:?}"
        ))),
    }
}

/// `v[key]` when present, else `v` itself: lets a tensor or decomposition
/// be read from its own document or from a larger one that embeds it.
pub fn field_or_self<'a>(v: &'a Value, key: &str) -> &'a Value {
    v.get(key).unwrap_or(v)
}

pub fn from_value<T: serde::de::DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| invalid(format!("{what}: {e}")))
}

/// Tensor from `"tensor"`, or from jet coordinates `"coords"` against the
/// given span vectors.
pub fn target_tensor(
    v: &Value,
    format: &Format,
    span: &[Vec<BigRational>],
) -> Result<PSTensor<BigRational>> {
    if let Some(t) = v.get("tensor") {
        return from_value::<TensorDoc>(t, "tensor")?.to_tensor();
    }
    if let Some(c) = v.get("coords") {
        let y = parse_rats(&from_value::<Vec<String>>(c, "coords")?)?;
        if y.len() != span.len() {
            return Err(invalid(format!(
                "{} coords for {} span vectors",
                y.len(),
                span.len()
            )));
        }
        return PSTensor::new(
            format.clone(),
            crate::linalg::linear_combination(&y, span, format.len()),
        );
    }
    Err(invalid("document needs a \"tensor\" or \"coords\" entry"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn format_round_trip() {
        let f = Format::new(vec![1, 2], vec![3, 1]).unwrap();
        let s = serde_json::to_string(&FormatDoc::from_format(&f)).unwrap();
        assert_eq!(s, r#"{"k":2,"n":[1,2],"d":[3,1]}"#);
        let back: FormatDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_format().unwrap(), f);
        let bad: FormatDoc = serde_json::from_str(r#"{"k":3,"n":[1],"d":[1]}"#).unwrap();
        assert!(bad.to_format().is_err());
    }

    #[test]
    fn tensor_and_jet_round_trip() {
        let f = Format::segre_p1(2).unwrap();
        let p = PSTensor::new(f.clone(), vec![int(1), rat(-1, 2), int(0), int(3)]).unwrap();
        let doc = TensorDoc::from_tensor(&p);
        assert_eq!(doc.coeffs[1], "-1/2");
        assert_eq!(doc.to_tensor().unwrap(), p);
        let jet = JetScheme::new(f, 2, vec![vec![vec![int(1)], vec![int(0), int(1)]]; 2]).unwrap();
        let jd: JetDoc =
            serde_json::from_value(serde_json::to_value(JetDoc::from_jet(&jet)).unwrap()).unwrap();
        assert_eq!(jd.to_jet().unwrap(), jet);
    }

    #[test]
    fn presentation_tags() {
        let v = serde_json::json!({"kind": "tangent", "support": [["1", "0"]], "direction": [["0", "1"]]});
        let doc: PresentationDoc = serde_json::from_value(v).unwrap();
        assert!(matches!(doc.parse().unwrap(), Presentation::Tangent(_)));
        let bad = serde_json::json!({"kind": "four-points", "points": []});
        assert!(serde_json::from_value::<PresentationDoc>(bad).is_err());
    }

    #[test]
    fn decomposition_round_trip_keeps_fields() {
        let f = Format::new(vec![1], vec![2]).unwrap();
        let x = ProductPoint::new(vec![vec![int(1), int(2)]]).unwrap();
        let d = AnyDecomposition::Exact(
            Decomposition::new(
                f.clone(),
                vec![Term {
                    coeff: int(3),
                    point: x,
                }],
            )
            .unwrap(),
        );
        let doc = DecompositionDoc::from_any(&d);
        assert_eq!(doc.to_any().unwrap(), d);
        let c = AnyDecomposition::Approx(d.to_complex());
        assert_eq!(DecompositionDoc::from_any(&c).to_any().unwrap(), c);
    }

    #[test]
    fn schema_check() {
        assert!(check_schema(&serde_json::json!({"schema": "secant3/1"})).is_ok());
        assert!(check_schema(&serde_json::json!({})).is_ok());
        assert!(check_schema(&serde_json::json!({"schema": "secant3/2"})).is_err());
    }
}
