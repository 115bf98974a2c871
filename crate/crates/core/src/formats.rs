//! JSON renderings used by the command-line tool, and the purity-pattern
//! file format.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::entropy_lp::{parse_rational, rational_string, LpError};
use crate::par::Exec;
use crate::qssverify::EntropyProfile;
use crate::qstate::{low_bits, PureState, QubitSubset};
use crate::uniformity::{
    dyadic, shadow_spectrum_with, AffineForm, Interval, KUniformity, PurityPattern, UniformityCertificate,
    UniformityError,
};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Rounds every non-integer number in the tree.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().expect("f64"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON, floats rounded, newline-terminated.
pub fn render(mut v: Value) -> String {
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

fn witness_fields(witness: &Option<(QubitSubset, f64)>) -> (Value, Value) {
    match witness {
        Some((s, p)) => (json!(s.indices()), json!(p)),
        None => (Value::Null, Value::Null),
    }
}

pub fn k_uniformity_json(k: usize, r: &KUniformity) -> Value {
    let (witness, purity) = witness_fields(&r.witness);
    json!({ "k": k, "uniform": r.uniform, "witness": witness, "purity": purity })
}

pub fn uniformity_certificate_json(c: &UniformityCertificate) -> Value {
    let (witness, purity) = witness_fields(&c.witness);
    json!({ "k_max": c.k_max, "ame": c.witness.is_none(), "witness": witness, "purity": purity })
}

/// One `{"t", "s_t"}` row per subset `T`, ascending by mask, or only the
/// requested one.
pub fn shadow_rows(state: &PureState, only: Option<QubitSubset>, exec: Exec) -> Result<Vec<Value>, UniformityError> {
    let spectrum = shadow_spectrum_with(state, exec)?;
    let row = |t: QubitSubset| json!({ "t": t.indices(), "s_t": spectrum[t.mask() as usize] });
    Ok(match only {
        Some(t) => vec![row(t)],
        None => (0..spectrum.len() as u32).map(|m| row(QubitSubset::from_mask(m))).collect(),
    })
}

pub fn affine_json(t: QubitSubset, form: &AffineForm) -> Value {
    json!({
        "t": t.indices(),
        "a": rational_string(&form.a),
        "b": rational_string(&form.b),
        "verdict": form.verdict,
    })
}

pub fn interval_json(i: &Interval) -> Value {
    json!({ "x_lo": rational_string(&i.lo), "x_lo_open": i.lo_open, "x_hi": rational_string(&i.hi) })
}

pub fn profile_json(profile: &EntropyProfile) -> Value {
    let rows: Vec<Value> = profile
        .iter()
        .map(|(s, v)| json!({ "subset": s.indices(), "entropy_bits": v }))
        .collect();
    json!({ "n_qubits": profile.n_qubits(), "entropies": rows })
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] LpError),
    #[error("qubit {qubit} outside a {n}-qubit register")]
    Qubit { qubit: usize, n: usize },
    #[error(transparent)]
    Pattern(#[from] UniformityError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixedEntry {
    subset: Vec<usize>,
    purity: String,
}

fn default_hi() -> String {
    "1".into()
}

/// Pattern file: subsets (0-indexed qubits) listed under `unknown` share
/// `x`, `fixed` entries carry explicit purities, everything else up to half
/// the register is maximally mixed. Complements are filled in.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    n_qubits: usize,
    #[serde(default)]
    unknown: Vec<Vec<usize>>,
    #[serde(default)]
    fixed: Vec<FixedEntry>,
    x_lo: String,
    #[serde(default)]
    x_lo_open: bool,
    #[serde(default = "default_hi")]
    x_hi: String,
}

pub fn parse_pattern(text: &str) -> Result<PurityPattern, FormatError> {
    let file: PatternFile = serde_json::from_str(text)?;
    let n = file.n_qubits;
    let full = low_bits(n);
    let mask = |qubits: &[usize]| -> Result<u32, FormatError> {
        match qubits.iter().find(|&&q| q >= n) {
            Some(&qubit) => Err(FormatError::Qubit { qubit, n }),
            None => Ok(QubitSubset::from_indices(qubits.iter().copied()).mask()),
        }
    };
    // The representative of each cut that the pattern stores.
    let small = |m: u32| {
        let c = full & !m;
        let rep = if m.count_ones() as usize * 2 <= n { m } else { c };
        let mut out = vec![rep];
        if c.count_ones() == m.count_ones() {
            out.push(full & !rep);
        }
        out
    };
    let mut unknown = BTreeSet::new();
    for u in &file.unknown {
        unknown.extend(small(mask(u)?));
    }
    let mut fixed = BTreeMap::new();
    for f in &file.fixed {
        let value = parse_rational(&f.purity)?;
        for m in small(mask(&f.subset)?) {
            fixed.insert(m, value.clone());
        }
    }
    for m in 1..full {
        if m.count_ones() as usize * 2 <= n && !unknown.contains(&m) {
            fixed.entry(m).or_insert_with(|| dyadic(m.count_ones() as usize));
        }
    }
    let interval = Interval { lo: parse_rational(&file.x_lo)?, lo_open: file.x_lo_open, hi: parse_rational(&file.x_hi)? };
    Ok(PurityPattern::new(n, fixed, unknown, interval)?)
}
