//! JSON ingestion of models and operators, and the versioned report format.
//!
//! Complex numbers travel as `[re, im]` pairs (bare reals are accepted on
//! input); floats are written with 17 significant digits so that reports
//! round-trip bit-exactly.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::{json, Map, Value};

use crate::derivatives::{BoundednessStatus, BoundednessVerdict, DerivativeChain};
use crate::dynamics::{Classification, ContinuityModulus, DiffReport, LipschitzReport};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::operator::Operator;
use crate::spectral::{ModelKind, SelfAdjointModel};
use crate::torus::{toeplitz, Builtin, FourierFunction};

pub const SCHEMA_VERSION: &str = "opderiv/1";

fn bad(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing field {key:?}")))
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| bad(format!("{what} must be a finite number")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("{what} must be a non-negative integer")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(format!("{what} must be a string")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(format!("{what} must be an array")))
}

/// `[re, im]` or a bare real.
pub fn parse_complex(v: &Value) -> Result<C64> {
    match v {
        Value::Number(_) => Ok(C64::from(as_f64(v, "entry")?)),
        Value::Array(p) if p.len() == 2 => Ok(C64::new(as_f64(&p[0], "re")?, as_f64(&p[1], "im")?)),
        _ => Err(bad("complex entries must be [re, im] or a number")),
    }
}

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Row-major `dim × dim` entries.
pub fn parse_matrix(v: &Value) -> Result<CMatrix> {
    let dim = as_usize(field(v, "dim")?, "dim")?;
    let rows = as_array(field(v, "entries")?, "entries")?;
    if dim == 0 || rows.len() != dim {
        return Err(bad(format!("entries must have {dim} rows, found {}", rows.len())));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        let row = as_array(row, "row")?;
        if row.len() != dim {
            return Err(bad(format!("row {r} has {} entries, expected {dim}", row.len())));
        }
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = parse_complex(z)?;
        }
    }
    Ok(m)
}

pub fn matrix_to_json(kind: &str, m: &CMatrix) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|r| Value::Array((0..m.ncols()).map(|c| complex_to_json(m[(r, c)])).collect()))
        .collect();
    json!({ "type": kind, "dim": m.nrows(), "entries": rows })
}

pub fn parse_model(v: &Value) -> Result<SelfAdjointModel> {
    match as_str(field(v, "type")?, "type")? {
        "hermitian" => SelfAdjointModel::hermitian(parse_matrix(v)?),
        "diagonal" => {
            let values = as_array(field(v, "eigenvalues")?, "eigenvalues")?
                .iter()
                .map(|x| as_f64(x, "eigenvalue"))
                .collect::<Result<Vec<_>>>()?;
            SelfAdjointModel::diagonal(values)
        }
        "circle" => SelfAdjointModel::circle(as_usize(field(v, "bandlimit")?, "bandlimit")?),
        other => Err(bad(format!("unknown model type {other:?}"))),
    }
}

pub fn model_to_json(model: &SelfAdjointModel) -> Value {
    match model.kind() {
        ModelKind::Hermitian => matrix_to_json("hermitian", &model.to_dense()),
        ModelKind::Diagonal => json!({ "type": "diagonal", "eigenvalues": model.eigenvalues() }),
        ModelKind::Circle => json!({ "type": "circle", "bandlimit": model.bandlimit() }),
    }
}

pub fn parse_fourier(v: &Value) -> Result<FourierFunction> {
    match as_str(field(v, "type")?, "type")? {
        "builtin" => {
            let name = as_str(field(v, "name")?, "name")?;
            Ok(FourierFunction::builtin(name.parse::<Builtin>().map_err(|e| bad(e.to_string()))?))
        }
        "table" => {
            let bandlimit = as_usize(field(v, "bandlimit")?, "bandlimit")?;
            let raw = field(v, "coeffs")?.as_object().ok_or_else(|| bad("coeffs must be an object"))?;
            let mut coeffs = BTreeMap::new();
            for (k, z) in raw {
                let n: i64 = k.trim().parse().map_err(|_| bad(format!("coefficient key {k:?} is not an integer")))?;
                if n.unsigned_abs() as usize > bandlimit {
                    return Err(bad(format!("coefficient {n} exceeds bandlimit {bandlimit}")));
                }
                coeffs.insert(n, parse_complex(z)?);
            }
            let name = v.get("name").and_then(Value::as_str).unwrap_or("table");
            let mut f = FourierFunction::table(name, coeffs)?;
            f.bandlimit = Some(bandlimit);
            Ok(f)
        }
        other => Err(bad(format!("{other:?} is not a Fourier symbol type"))),
    }
}

/// Operator file for a given model: a dense matrix, or a symbol on a circle model.
pub fn parse_operator(v: &Value, model: &SelfAdjointModel) -> Result<Operator> {
    let op = match as_str(field(v, "type")?, "type")? {
        "matrix" => Operator::Dense(parse_matrix(v)?),
        "table" | "builtin" => {
            let l = match (model.kind(), model.bandlimit()) {
                (ModelKind::Circle, Some(l)) => l,
                _ => return Err(bad("Fourier symbols need a circle model")),
            };
            Operator::Toeplitz(toeplitz(&parse_fourier(v)?, l))
        }
        other => return Err(bad(format!("unknown operator type {other:?}"))),
    };
    model.check_operator_dim(op.dim())?;
    Ok(op)
}

pub fn verdict_to_json(v: &BoundednessVerdict) -> Value {
    json!({
        "verdict": v.status.as_str(),
        "norm_estimate": v.norm_estimate,
        "growth_exponent": v.growth_exponent,
        "curve": v.curve.iter().map(|&(n, y)| json!([n, y])).collect::<Vec<_>>(),
        "leaked": v.leaked,
    })
}

pub fn lipschitz_to_json(l: &LipschitzReport, consistent: Option<bool>) -> Value {
    json!({
        "t": l.t_grid,
        "ratio": l.ratios,
        "sup_ratio": l.sup_ratio,
        "limit_estimate": l.limit_estimate,
        "valid_floor": l.valid_floor,
        "consistent": consistent,
    })
}

pub fn continuity_to_json(c: &ContinuityModulus) -> Value {
    json!({ "delta": c.delta_grid, "omega": c.omega })
}

pub fn chain_to_json(c: &DerivativeChain) -> Value {
    json!({
        "order": c.order,
        "fully_bounded": c.is_fully_bounded(),
        "verdicts": c.verdicts.iter().map(verdict_to_json).collect::<Vec<_>>(),
    })
}

/// Report object without run metadata.
pub fn report_to_json(r: &DiffReport) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "classification": r.classification.as_str(),
        "derivative_norm": r.derivative_norm,
        "weak": verdict_to_json(&r.weak_verdict),
        "lipschitz": lipschitz_to_json(&r.lipschitz, r.lipschitz_consistent),
        "continuity": r.continuity.as_ref().map(continuity_to_json),
        "chain": r.chain.as_ref().map(chain_to_json),
    })
}

const REPORT_KEYS: &[&str] =
    &["schema", "classification", "derivative_norm", "weak", "lipschitz", "continuity", "chain", "metadata", "extras"];

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>> {
    as_array(v, what)?.iter().map(|x| as_f64(x, what)).collect()
}

fn validate_verdict(v: &Value, what: &str) -> Result<()> {
    let verdict = as_str(field(v, "verdict")?, "verdict")?;
    if ![BoundednessStatus::Bounded, BoundednessStatus::Unbounded, BoundednessStatus::Inconclusive]
        .iter()
        .any(|s| s.as_str() == verdict)
    {
        return Err(bad(format!("{what}: unknown verdict {verdict:?}")));
    }
    if as_f64(field(v, "norm_estimate")?, "norm_estimate")? < 0.0 {
        return Err(bad(format!("{what}: negative norm estimate")));
    }
    as_f64(field(v, "growth_exponent")?, "growth_exponent")?;
    field(v, "leaked")?.as_bool().ok_or_else(|| bad(format!("{what}: leaked must be boolean")))?;
    let mut last = f64::NEG_INFINITY;
    for p in as_array(field(v, "curve")?, "curve")? {
        let pair = numbers(p, "curve point")?;
        if pair.len() != 2 {
            return Err(bad(format!("{what}: curve points are [n, norm] pairs")));
        }
        if pair[1] < last {
            return Err(bad(format!("{what}: curve must be nondecreasing")));
        }
        last = pair[1];
    }
    Ok(())
}

/// Structural check of a report against `opderiv/1`.
pub fn validate_report(v: &Value) -> Result<()> {
    let obj = v.as_object().ok_or_else(|| bad("report must be an object"))?;
    if let Some(k) = obj.keys().find(|k| !REPORT_KEYS.contains(&k.as_str())) {
        return Err(bad(format!("unexpected key {k:?}")));
    }
    if as_str(field(v, "schema")?, "schema")? != SCHEMA_VERSION {
        return Err(bad(format!("schema must be {SCHEMA_VERSION:?}")));
    }
    let class = as_str(field(v, "classification")?, "classification")?;
    let known = [Classification::Strong, Classification::WeakOnly, Classification::NotWeak, Classification::Inconclusive];
    if !known.iter().any(|c| c.as_str() == class) {
        return Err(bad(format!("unknown classification {class:?}")));
    }
    match field(v, "derivative_norm")? {
        Value::Null => {}
        x => {
            as_f64(x, "derivative_norm")?;
        }
    }
    validate_verdict(field(v, "weak")?, "weak")?;

    let lip = field(v, "lipschitz")?;
    let t = numbers(field(lip, "t")?, "lipschitz.t")?;
    let ratio = numbers(field(lip, "ratio")?, "lipschitz.ratio")?;
    if t.is_empty() || t.len() != ratio.len() {
        return Err(bad("lipschitz.t and lipschitz.ratio must be non-empty and equally long"));
    }
    let floor = as_f64(field(lip, "valid_floor")?, "valid_floor")?;
    if t.iter().any(|&x| x < floor) || t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad("lipschitz.t must be increasing and above the floor"));
    }
    let sup = as_f64(field(lip, "sup_ratio")?, "sup_ratio")?;
    if sup != ratio.iter().copied().fold(0.0, f64::max) {
        return Err(bad("lipschitz.sup_ratio must equal max(ratio)"));
    }
    as_f64(field(lip, "limit_estimate")?, "limit_estimate")?;

    match field(v, "continuity")? {
        Value::Null => {}
        c => {
            let delta = numbers(field(c, "delta")?, "continuity.delta")?;
            let omega = numbers(field(c, "omega")?, "continuity.omega")?;
            if delta.len() != omega.len() {
                return Err(bad("continuity.delta and continuity.omega differ in length"));
            }
            if delta.windows(2).any(|w| w[1] >= w[0]) || omega.windows(2).any(|w| w[1] > w[0]) {
                return Err(bad("continuity.delta must decrease and omega must not increase"));
            }
        }
    }
    match field(v, "chain")? {
        Value::Null => {}
        c => {
            let order = as_usize(field(c, "order")?, "chain.order")?;
            let verdicts = as_array(field(c, "verdicts")?, "chain.verdicts")?;
            if verdicts.is_empty() || verdicts.len() > order {
                return Err(bad("chain.verdicts must hold between 1 and order entries"));
            }
            for (i, w) in verdicts.iter().enumerate() {
                validate_verdict(w, &format!("chain.verdicts[{i}]"))?;
            }
        }
    }
    if let Some(m) = obj.get("metadata") {
        m.as_object().ok_or_else(|| bad("metadata must be an object"))?;
    }
    Ok(())
}

/// Writes every float as `{:.16e}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Pretty-ish JSON text with 17-significant-digit floats and a trailing newline.
pub fn to_json_string(v: &impl Serialize) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FullPrecision);
    v.serialize(&mut ser).map_err(|e| Error::invalid(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
}

/// Adds (or replaces) a top-level key of a report object.
pub fn insert(report: &mut Value, key: &str, value: Value) {
    if let Value::Object(map) = report {
        map.insert(key.to_owned(), value);
    } else {
        let mut map = Map::new();
        map.insert(key.to_owned(), value);
        *report = Value::Object(map);
    }
}
