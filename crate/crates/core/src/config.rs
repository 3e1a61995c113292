//! JSON configuration documents.
//!
//! ```json
//! {
//!   "triplet": {
//!     "drift": [0.0],
//!     "measure": { "kind": "atomic", "atoms": [{ "u": [1.0], "w": 1.0 }] }
//!   },
//!   "family": { "thetas": [-1, -0.5, 0, 0.5, 1], "lambda": 1.0, "cap": 1.0 }
//! }
//! ```
//!
//! `measure` may instead be `{ "kind": "exp_intensity", "alpha": a, "beta": b }`
//! (scalar, `drift` of length 1). An optional `gaussian` entry is accepted
//! only if it is an all-zero matrix. A document whose top level holds `drift`
//! and `measure` is read as a bare triplet. Every validation error names the
//! offending key path, e.g. `triplet.measure.atoms[1].w`.

use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::function_class::LipschitzRampFamily;
use crate::levy::{Atom, AtomicLevyMeasure, ExpIntensityMeasure, GeneratingTriplet, LevyMeasure};

#[derive(Debug, Clone, Default)]
pub struct ConfigDocument {
    pub triplet: Option<GeneratingTriplet>,
    pub family: Option<LipschitzRampFamily>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn object<'a>(v: &'a Value, key: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::invalid(key, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, prefix: &str, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::invalid(join(prefix, key), "missing"))
}

fn number(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::invalid(key, "expected a number"))
}

fn numbers(v: &Value, key: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::invalid(key, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{key}[{i}]")))
        .collect()
}

fn reject_unknown(obj: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::invalid(join(prefix, k), "unknown key")),
        None => Ok(()),
    }
}

/// Re-roots constructor errors, which name keys relative to the triplet.
fn rekey(e: Error, prefix: &str) -> Error {
    match e {
        Error::Invalid { key, reason } => Error::Invalid {
            key: join(prefix, &key),
            reason,
        },
        other => other,
    }
}

/// Parses a triplet object; `prefix` is the key path of `v` in its document.
pub fn parse_triplet(v: &Value, prefix: &str) -> Result<GeneratingTriplet> {
    let obj = object(v, if prefix.is_empty() { "<root>" } else { prefix })?;
    reject_unknown(obj, prefix, &["drift", "measure", "gaussian"])?;
    let drift_key = join(prefix, "drift");
    let drift = numbers(field(obj, prefix, "drift")?, &drift_key)?;

    let mkey = join(prefix, "measure");
    let m = object(field(obj, prefix, "measure")?, &mkey)?;
    let kind_key = join(&mkey, "kind");
    let kind = field(m, &mkey, "kind")?
        .as_str()
        .ok_or_else(|| Error::invalid(kind_key.clone(), "expected a string"))?;
    let measure = match kind {
        "atomic" => {
            reject_unknown(m, &mkey, &["kind", "atoms"])?;
            let akey = join(&mkey, "atoms");
            let raw = field(m, &mkey, "atoms")?
                .as_array()
                .ok_or_else(|| Error::invalid(akey.clone(), "expected an array"))?;
            let mut atoms = Vec::with_capacity(raw.len());
            for (i, a) in raw.iter().enumerate() {
                let k = format!("{akey}[{i}]");
                let ao = object(a, &k)?;
                reject_unknown(ao, &k, &["u", "w"])?;
                let u = field(ao, &k, "u")?;
                // scalar locations are accepted as shorthand for [u]
                let location = match u.as_f64() {
                    Some(x) => vec![x],
                    None => numbers(u, &join(&k, "u"))?,
                };
                let w = number(field(ao, &k, "w")?, &join(&k, "w"))?;
                atoms.push(Atom::new(location, w));
            }
            LevyMeasure::Atomic(AtomicLevyMeasure::new(atoms).map_err(|e| rekey(e, prefix))?)
        }
        "exp_intensity" => {
            reject_unknown(m, &mkey, &["kind", "alpha", "beta"])?;
            let alpha = number(field(m, &mkey, "alpha")?, &join(&mkey, "alpha"))?;
            let beta = number(field(m, &mkey, "beta")?, &join(&mkey, "beta"))?;
            LevyMeasure::ExpIntensity(
                ExpIntensityMeasure::new(alpha, beta).map_err(|e| rekey(e, prefix))?,
            )
        }
        other => {
            return Err(Error::invalid(
                kind_key,
                format!("unknown kind {other:?}; expected \"atomic\" or \"exp_intensity\""),
            ))
        }
    };

    if let Some(g) = obj.get("gaussian") {
        let gkey = join(prefix, "gaussian");
        let rows = g
            .as_array()
            .ok_or_else(|| Error::invalid(gkey.clone(), "expected a matrix"))?;
        for (i, row) in rows.iter().enumerate() {
            let row = numbers(row, &format!("{gkey}[{i}]"))?;
            if let Some(j) = row.iter().position(|&x| x != 0.0) {
                return Err(Error::invalid(
                    format!("{gkey}[{i}][{j}]"),
                    "only a zero Gaussian component is supported",
                ));
            }
        }
    }

    GeneratingTriplet::new(drift, measure).map_err(|e| rekey(e, prefix))
}

pub fn parse_family(v: &Value, prefix: &str) -> Result<LipschitzRampFamily> {
    let obj = object(v, prefix)?;
    reject_unknown(obj, prefix, &["thetas", "lambda", "cap"])?;
    let thetas = numbers(field(obj, prefix, "thetas")?, &join(prefix, "thetas"))?;
    let lambda = number(field(obj, prefix, "lambda")?, &join(prefix, "lambda"))?;
    let cap = number(field(obj, prefix, "cap")?, &join(prefix, "cap"))?;
    LipschitzRampFamily::new(thetas, lambda, cap)
}

/// Parses a full document or a bare triplet.
pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    let v: Value = serde_json::from_str(text)?;
    let obj = object(&v, "<root>")?;
    if obj.contains_key("drift") || obj.contains_key("measure") {
        return Ok(ConfigDocument {
            triplet: Some(parse_triplet(&v, "")?),
            family: None,
        });
    }
    reject_unknown(obj, "", &["triplet", "family"])?;
    Ok(ConfigDocument {
        triplet: obj
            .get("triplet")
            .map(|t| parse_triplet(t, "triplet"))
            .transpose()?,
        family: obj
            .get("family")
            .map(|f| parse_family(f, "family"))
            .transpose()?,
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigDocument> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// JSON form of a triplet, readable by [`parse_triplet`].
pub fn triplet_to_json(t: &GeneratingTriplet) -> Value {
    let measure = match t.measure() {
        LevyMeasure::Atomic(m) => serde_json::json!({
            "kind": "atomic",
            "atoms": m.atoms().iter().map(|a| serde_json::json!({"u": a.location, "w": a.mass})).collect::<Vec<_>>(),
        }),
        LevyMeasure::ExpIntensity(e) => {
            serde_json::json!({"kind": "exp_intensity", "alpha": e.alpha, "beta": e.beta})
        }
    };
    serde_json::json!({"drift": t.drift(), "measure": measure})
}
