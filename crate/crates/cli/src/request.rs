use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use secant3::engine::{
    bound_curvilinear, bound_sigma3, decompose_curvilinear, decompose_sigma3, decompose_tangent,
    EngineOptions, EngineOutput, Status,
};
use secant3::linalg::linear_combination;
use secant3::scalar::parse_rational;
use secant3::sylvester::{sylvester_general, BinaryPoint, SylvesterOptions};
use secant3::tensorspace::{
    embed, verify_decomposition, AnyDecomposition, FlatteningOptions, Format, Mode, PSTensor,
    DEFAULT_VERIFY_TOL,
};
use secant3::wire::{
    self, DecompositionDoc, FormatDoc, MultiJetDoc, PointDoc, Presentation, PresentationDoc,
    RncDoc, TensorDoc, WitnessDoc, SCHEMA,
};
use secant3::witness::{border_family, loglog_slope, make_witness, SLOPE_EPSILONS};
use secant3::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bound,
    Embed,
    Decompose,
    Curvilinear,
    Witness,
    Sylvester,
    Verify,
    Family,
}

fn default_tol() -> f64 {
    DEFAULT_VERIFY_TOL
}

/// One unit of work: a subcommand, its input document and its options.
/// Batch manifests list these as JSON objects.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Request {
    pub command: Command,
    #[serde(default)]
    pub input: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub x: Option<usize>,
    #[serde(default)]
    pub c: Option<usize>,
    #[serde(default)]
    pub alpha: Option<usize>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub rank_tau: Option<f64>,
    #[serde(default)]
    pub retries: Option<usize>,
    #[serde(default)]
    pub timings: bool,
    /// Mantissa bits kept in complex outputs.
    #[serde(default)]
    pub precision: Option<u32>,
    /// Raw text of `input` when it came from a file or the command line, so
    /// schema errors can name a line.
    #[serde(skip)]
    pub source: Option<String>,
}

impl Request {
    pub fn new(command: Command, input: Value) -> Self {
        Request {
            command,
            input,
            seed: 0,
            tol: DEFAULT_VERIFY_TOL,
            mode: None,
            k: None,
            x: None,
            c: None,
            alpha: None,
            eps: Vec::new(),
            rank_tau: None,
            retries: None,
            timings: false,
            precision: None,
            source: None,
        }
    }

    fn engine_options(&self) -> EngineOptions {
        let mut o = EngineOptions {
            seed: self.seed,
            tol: self.tol,
            ..EngineOptions::default()
        };
        if let Some(r) = self.retries {
            o.retries = r;
        }
        if let Some(tau) = self.rank_tau {
            o.flattening = FlatteningOptions {
                tau,
                ..o.flattening
            };
        }
        o
    }
}

/// Output document plus a one-line summary; `failed` maps to exit code 2.
#[derive(Debug, Clone)]
pub struct Response {
    pub doc: Value,
    pub summary: String,
    pub failed: bool,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::VerificationFailed { .. } => 2,
        Error::RetriesExhausted { .. } => 4,
        _ => 3,
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    wire::check_schema(v)?;
    wire::from_value(v, what)
}

/// Parses the request's own input, preferring the raw text for
/// line-anchored messages.
fn parse_input<T: serde::de::DeserializeOwned>(req: &Request, what: &str) -> Result<T> {
    wire::check_schema(&req.input)?;
    match &req.source {
        Some(text) => {
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
        }
        None => wire::from_value(&req.input, what),
    }
}

fn to_json<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("documents serialize")
}

/// Rounds to `bits` significant bits; identity for `bits >= 53`.
pub fn round_bits(x: f64, bits: u32) -> f64 {
    if bits >= 53 || x == 0.0 || !x.is_finite() {
        return x;
    }
    let e = x.abs().log2().floor() as i32;
    let scale = 2f64.powi(bits as i32 - 1 - e);
    (x * scale).round() / scale
}

fn round_decomposition(d: AnyDecomposition, bits: Option<u32>) -> AnyDecomposition {
    let Some(bits) = bits else { return d };
    match d {
        AnyDecomposition::Approx(mut d) => {
            let r = |z: &mut Complex64| {
                *z = Complex64::new(round_bits(z.re, bits), round_bits(z.im, bits))
            };
            for t in &mut d.terms {
                r(&mut t.coeff);
                t.point.factors.iter_mut().flatten().for_each(r);
            }
            AnyDecomposition::Approx(d)
        }
        exact => exact,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetDoc {
    #[allow(dead_code)]
    #[serde(default)]
    schema: Option<String>,
    #[serde(default)]
    format: Option<FormatDoc>,
    #[serde(default)]
    presentation: Option<PresentationDoc>,
    #[serde(default)]
    multijet: Option<MultiJetDoc>,
    #[serde(default)]
    tensor: Option<TensorDoc>,
    #[serde(default)]
    coords: Option<Vec<String>>,
}

fn first_jet_format(p: &PresentationDoc) -> Option<&FormatDoc> {
    match p {
        PresentationDoc::PointPlusTangent { jet, .. } | PresentationDoc::Jet3 { jet } => {
            Some(&jet.format)
        }
        PresentationDoc::TwoTangentsOnLine { v, .. } => Some(&v.format),
        _ => None,
    }
}

impl TargetDoc {
    fn format(&self) -> Result<Format> {
        let doc = self
            .format
            .as_ref()
            .or(self.tensor.as_ref().map(|t| &t.format))
            .or(self.presentation.as_ref().and_then(first_jet_format))
            .or(self
                .multijet
                .as_ref()
                .and_then(|m| m.components.first().map(|j| &j.format)))
            .ok_or_else(|| {
                Error::InvalidInput("cannot determine the format; add a \"format\" entry".into())
            })?;
        doc.to_format()
    }

    fn tensor(
        &self,
        format: &Format,
        span: &[Vec<num_rational::BigRational>],
    ) -> Result<PSTensor<num_rational::BigRational>> {
        if let Some(t) = &self.tensor {
            let p = t.to_tensor()?;
            if &p.format != format {
                return Err(Error::InvalidInput(
                    "tensor format differs from the presentation format".into(),
                ));
            }
            return Ok(p);
        }
        let Some(c) = &self.coords else {
            return Err(Error::InvalidInput(
                "input needs a \"tensor\" or \"coords\" entry".into(),
            ));
        };
        let y = c
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        if y.len() != span.len() {
            return Err(Error::InvalidInput(format!(
                "{} coords for {} span vectors",
                y.len(),
                span.len()
            )));
        }
        PSTensor::new(format.clone(), linear_combination(&y, span, format.len()))
    }
}

fn finish_engine(
    req: &Request,
    p: &PSTensor<num_rational::BigRational>,
    mut out: EngineOutput,
    started: Instant,
) -> Result<Response> {
    if let Some(mode) = req.mode {
        if mode != out.certificate.mode {
            let rec = verify_decomposition(p, &out.decomposition, mode, req.tol)?;
            out.certificate.mode = rec.mode;
            out.certificate.residual = rec.residual;
        }
    }
    if req.timings {
        out.certificate.timings_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let c = &out.certificate;
    let failed = c.status == Status::BoundExceeded;
    let summary = format!(
        "{}: size {} (bound {}), {:?} residual {:.3e}, flattening rank {}{}",
        c.route,
        c.size,
        c.bound,
        c.mode,
        c.residual,
        c.flattening_max_rank
            .map_or("n/a".to_string(), |r| r.to_string()),
        if c.fallback { ", fallback" } else { "" }
    );
    let dec = round_decomposition(out.decomposition, req.precision);
    Ok(Response {
        doc: json!({
            "schema": SCHEMA,
            "tensor": to_json(&TensorDoc::from_tensor(p)),
            "certificate": to_json(&out.certificate),
            "decomposition": to_json(&DecompositionDoc::from_any(&dec)),
        }),
        summary,
        failed,
    })
}

pub fn run(req: &Request) -> Result<Response> {
    let started = Instant::now();
    if !(req.tol.is_finite() && req.tol >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be nonnegative, got {}",
            req.tol
        )));
    }
    match req.command {
        Command::Bound => {
            #[derive(Deserialize)]
            struct BoundDoc {
                format: FormatDoc,
            }
            let doc: BoundDoc = parse_input(req, "bound input")?;
            let f = doc.format.to_format()?;
            let bound = match (req.c, req.alpha) {
                (None, None) => bound_sigma3(&f),
                (Some(c), Some(a)) => bound_curvilinear(&f, c, a).ok_or_else(|| {
                    Error::InvalidInput(format!("need 1 <= alpha <= c, got c = {c}, alpha = {a}"))
                })?,
                _ => return Err(Error::InvalidInput("--c and --alpha go together".into())),
            };
            Ok(Response {
                doc: json!(bound),
                summary: format!("rank bound {bound}"),
                failed: false,
            })
        }
        Command::Embed => {
            #[derive(Deserialize)]
            struct EmbedDoc {
                format: FormatDoc,
                point: PointDoc,
            }
            let doc: EmbedDoc = parse_input(req, "embed input")?;
            let f = doc.format.to_format()?;
            let x = secant3::tensorspace::ProductPoint::new(
                doc.point
                    .iter()
                    .map(|v| v.iter().map(|s| parse_rational(s)).collect())
                    .collect::<Result<_>>()?,
            )?;
            let p = embed(&f, &x)?;
            Ok(Response {
                doc: json!({"schema": SCHEMA, "tensor": to_json(&TensorDoc::from_tensor(&p))}),
                summary: format!("embedded into P^{}", f.ambient_dim()),
                failed: false,
            })
        }
        Command::Decompose => {
            let doc: TargetDoc = parse_input(req, "decompose input")?;
            let pres = doc
                .presentation
                .as_ref()
                .ok_or_else(|| {
                    Error::InvalidInput("decompose input needs a \"presentation\"".into())
                })?
                .parse()?;
            let format = doc.format()?;
            let opts = req.engine_options();
            let (p, out) = match &pres {
                Presentation::Border(b) => {
                    let p = doc.tensor(&format, &b.span_vectors(&format)?)?;
                    let out = decompose_sigma3(b, &p, &opts)?;
                    (p, out)
                }
                Presentation::Tangent(t) => {
                    let p = doc.tensor(&format, &t.jet(&format)?.jet_vectors())?;
                    let out = decompose_tangent(t, &p, &opts)?;
                    (p, out)
                }
            };
            finish_engine(req, &p, out, started)
        }
        Command::Curvilinear => {
            let doc: TargetDoc = parse_input(req, "curvilinear input")?;
            let mj = doc
                .multijet
                .as_ref()
                .ok_or_else(|| {
                    Error::InvalidInput("curvilinear input needs a \"multijet\"".into())
                })?
                .to_multijet()?;
            let format = mj.format().clone();
            let span: Vec<_> = mj
                .components()
                .iter()
                .flat_map(|c| c.jet_vectors())
                .collect();
            let p = doc.tensor(&format, &span)?;
            let out = decompose_curvilinear(&mj, &p, &req.engine_options())?;
            finish_engine(req, &p, out, started)
        }
        Command::Witness => {
            let k = req
                .k
                .ok_or_else(|| Error::InvalidInput("witness needs --k".into()))?;
            let x = req
                .x
                .ok_or_else(|| Error::InvalidInput("witness needs --x".into()))?;
            let mut w = make_witness(k, x, req.seed)?;
            w.decomposition = round_decomposition(w.decomposition, req.precision);
            if req.timings {
                w.certificate.timings_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            let c = &w.certificate;
            let summary = format!(
                "witness k={k} x={x}: size {}, flattening rank {}, border slope {:.3}",
                c.size,
                w.flattenings.max_rank,
                c.border_slope.unwrap_or(f64::NAN)
            );
            let failed = c.status == Status::BoundExceeded;
            Ok(Response {
                doc: to_json(&WitnessDoc::from_bundle(&w)),
                summary,
                failed,
            })
        }
        Command::Sylvester => {
            #[derive(Deserialize)]
            struct SylDoc {
                coeffs: Vec<String>,
            }
            let doc: SylDoc = parse_input(req, "sylvester input")?;
            let y = doc
                .coeffs
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()?;
            let q = BinaryPoint::new(y.clone())?;
            let opts = SylvesterOptions {
                seed: req.seed,
                tol: req.tol * 0.1,
                ..SylvesterOptions::default()
            };
            let rnc = sylvester_general(&q, &opts)?;
            let target: Vec<Complex64> = y.iter().map(secant3::Scalar::to_complex).collect();
            let residual =
                secant3::tensorspace::verify::projective_residual(&target, &rnc.evaluate());
            if residual > req.tol {
                return Err(Error::VerificationFailed {
                    residual,
                    tol: req.tol,
                });
            }
            Ok(Response {
                doc: json!({"schema": SCHEMA, "rnc": to_json(&RncDoc::from_rnc(&rnc)), "residual": residual}),
                summary: format!("binary form of degree {}: size {}", rnc.a, rnc.size()),
                failed: false,
            })
        }
        Command::Verify => {
            let p = wire::field_or_self(req.input.get("p").unwrap_or(&Value::Null), "tensor");
            let d = wire::field_or_self(
                req.input.get("dec").unwrap_or(&Value::Null),
                "decomposition",
            );
            let p: TensorDoc = parse(p, "tensor")?;
            let d: DecompositionDoc = parse(d, "decomposition")?;
            let p = p.to_tensor()?;
            let dec = d.to_any()?;
            let mode = req.mode.unwrap_or(if dec.is_exact() {
                Mode::Exact
            } else {
                Mode::Numeric
            });
            let rec = verify_decomposition(&p, &dec, mode, req.tol)?;
            Ok(Response {
                summary: format!(
                    "verified: size {}, {:?} residual {:.3e}",
                    rec.size, rec.mode, rec.residual
                ),
                doc: json!({"schema": SCHEMA, "verification": to_json(&rec)}),
                failed: false,
            })
        }
        Command::Family => {
            let doc: TargetDoc = parse_input(req, "family input")?;
            let pres = match doc
                .presentation
                .as_ref()
                .map(PresentationDoc::parse)
                .transpose()?
            {
                Some(Presentation::Border(b)) => b,
                _ => {
                    return Err(Error::InvalidInput(
                        "family input needs a jet3 \"presentation\"".into(),
                    ))
                }
            };
            let format = doc.format()?;
            let p = doc.tensor(&format, &pres.span_vectors(&format)?)?;
            let eps = if req.eps.is_empty() {
                SLOPE_EPSILONS.to_vec()
            } else {
                req.eps.clone()
            };
            let fams = eps
                .iter()
                .map(|&e| border_family(&pres, &p, e))
                .collect::<Result<Vec<_>>>()?;
            let residuals: Vec<f64> = fams.iter().map(|f| f.residual).collect();
            let slope = (eps.len() >= 2).then(|| loglog_slope(&eps, &residuals));
            let entries: Vec<Value> = eps
                .iter()
                .zip(&fams)
                .map(|(e, f)| {
                    json!({
                        "eps": e,
                        "residual": f.residual,
                        "decomposition": to_json(&DecompositionDoc::from_any(&AnyDecomposition::Exact(f.decomposition.clone()))),
                    })
                })
                .collect();
            Ok(Response {
                summary: format!(
                    "border family: residuals {:?}{}",
                    residuals
                        .iter()
                        .map(|r| format!("{r:.2e}"))
                        .collect::<Vec<_>>(),
                    slope.map_or(String::new(), |s| format!(", slope {s:.3}"))
                ),
                doc: json!({"schema": SCHEMA, "families": entries, "slope": slope}),
                failed: false,
            })
        }
    }
}
