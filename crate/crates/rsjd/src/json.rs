//! Parsing and serialization of the model document format.
//!
//! A model document is a single JSON object:
//!
//! ```json
//! {
//!   "states": 2,
//!   "generator": [[-1.0, 1.0], [0.2, -0.2]],
//!   "regimes": [
//!     {"mu": 0.03, "sigma": 0.30, "lambda": 2.0, "jump": {"a": 0.0, "b": 0.08}},
//!     {"mu": 0.06, "sigma": 0.05, "lambda": 0.8, "jump": {"a": 0.0, "b": 0.15}}
//!   ],
//!   "initial_state": 1,
//!   "measure": "P"
//! }
//! ```
//!
//! The `measure` field is either the string `"P"` or an object
//! `{"Q": {"r": 0.005}}`.  Parse errors carry the JSON path of the offending
//! node (`regimes[1].jump.b` and the like) so that a typo in a 3-regime
//! document does not turn into an opaque "invalid model" message.  Parsing is
//! structural only; semantic checks (row sums, positivity) live in
//! [`RegimeModel::validate`].

use ndarray::Array2;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{JumpLaw, MeasureTag, RegimeModel, RegimeParams};

fn err(path: &str, message: impl Into<String>) -> Error {
    Error::Document {
        path: path.to_string(),
        message: message.into(),
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn as_number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn as_count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn get<'a>(map: &'a Map<String, Value>, key: &str, parent: &str) -> Result<&'a Value> {
    map.get(key)
        .ok_or_else(|| err(parent, format!("missing required field `{key}`")))
}

fn field_path(parent: &str, key: &str) -> String {
    if parent.is_empty() {
        key.to_string()
    } else {
        format!("{parent}.{key}")
    }
}

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], parent: &str) -> Result<()> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(err(
                &field_path(parent, key),
                format!("unknown field (expected one of: {})", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn parse_jump(v: &Value, path: &str) -> Result<JumpLaw> {
    let obj = as_object(v, path)?;
    reject_unknown(obj, &["a", "b"], path)?;
    Ok(JumpLaw {
        mean: as_number(get(obj, "a", path)?, &field_path(path, "a"))?,
        std: as_number(get(obj, "b", path)?, &field_path(path, "b"))?,
    })
}

fn parse_regime(v: &Value, path: &str) -> Result<RegimeParams> {
    let obj = as_object(v, path)?;
    reject_unknown(obj, &["mu", "sigma", "lambda", "jump"], path)?;
    Ok(RegimeParams {
        mu: as_number(get(obj, "mu", path)?, &field_path(path, "mu"))?,
        sigma: as_number(get(obj, "sigma", path)?, &field_path(path, "sigma"))?,
        lambda: as_number(get(obj, "lambda", path)?, &field_path(path, "lambda"))?,
        jump: parse_jump(get(obj, "jump", path)?, &field_path(path, "jump"))?,
    })
}

fn parse_generator(v: &Value, states: usize, path: &str) -> Result<Array2<f64>> {
    let rows = as_array(v, path)?;
    if rows.len() != states {
        return Err(err(
            path,
            format!("expected {states} rows to match `states`, got {}", rows.len()),
        ));
    }
    let mut flat = Vec::with_capacity(states * states);
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let entries = as_array(row, &row_path)?;
        if entries.len() != states {
            return Err(err(
                &row_path,
                format!("expected {states} entries, got {}", entries.len()),
            ));
        }
        for (j, entry) in entries.iter().enumerate() {
            flat.push(as_number(entry, &format!("{path}[{i}][{j}]"))?);
        }
    }
    Ok(Array2::from_shape_vec((states, states), flat).expect("shape checked above"))
}

fn parse_measure(v: &Value, path: &str) -> Result<MeasureTag> {
    match v {
        Value::String(s) if s == "P" => Ok(MeasureTag::Historical),
        Value::String(s) => Err(err(
            path,
            format!("unknown measure `{s}` (expected \"P\" or {{\"Q\": {{\"r\": …}}}})"),
        )),
        Value::Object(obj) => {
            reject_unknown(obj, &["Q"], path)?;
            let q_path = field_path(path, "Q");
            let q = as_object(get(obj, "Q", path)?, &q_path)?;
            reject_unknown(q, &["r"], &q_path)?;
            let rate = as_number(get(q, "r", &q_path)?, &field_path(&q_path, "r"))?;
            Ok(MeasureTag::RiskNeutral { rate })
        }
        _ => Err(err(path, "expected \"P\" or {\"Q\": {\"r\": …}}")),
    }
}

/// Parses a model document.  Structural errors name the JSON path at fault.
pub fn parse_model(text: &str) -> Result<RegimeModel> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| err("(document)", format!("not valid JSON: {e}")))?;
    let obj = as_object(&root, "(document)")?;
    reject_unknown(
        obj,
        &["states", "generator", "regimes", "initial_state", "measure"],
        "",
    )?;
    let states = as_count(get(obj, "states", "(document)")?, "states")?;
    if states == 0 {
        return Err(err("states", "must be at least 1"));
    }
    let regime_values = as_array(get(obj, "regimes", "(document)")?, "regimes")?;
    if regime_values.len() != states {
        return Err(err(
            "regimes",
            format!(
                "expected {states} entries to match `states`, got {}",
                regime_values.len()
            ),
        ));
    }
    let regimes = regime_values
        .iter()
        .enumerate()
        .map(|(i, v)| parse_regime(v, &format!("regimes[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let generator = parse_generator(get(obj, "generator", "(document)")?, states, "generator")?;
    let initial_state = as_count(get(obj, "initial_state", "(document)")?, "initial_state")?;
    let measure = parse_measure(get(obj, "measure", "(document)")?, "measure")?;
    Ok(RegimeModel {
        generator,
        regimes,
        initial_state,
        measure,
    })
}

/// Serializes a model back into the document format.
pub fn model_to_json(model: &RegimeModel) -> Value {
    let m = model.state_count();
    let generator: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| model.generator[(i, j)]).collect())
        .collect();
    let regimes: Vec<Value> = model
        .regimes
        .iter()
        .map(|rg| {
            json!({
                "mu": rg.mu,
                "sigma": rg.sigma,
                "lambda": rg.lambda,
                "jump": {"a": rg.jump.mean, "b": rg.jump.std},
            })
        })
        .collect();
    let measure = match model.measure {
        MeasureTag::Historical => json!("P"),
        MeasureTag::RiskNeutral { rate } => json!({"Q": {"r": rate}}),
    };
    json!({
        "states": m,
        "generator": generator,
        "regimes": regimes,
        "initial_state": model.initial_state,
        "measure": measure,
    })
}
