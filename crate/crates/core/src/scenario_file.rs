//! Flat JSON scenario files.
//!
//! A file is a JSON object whose keys are exactly the field names of the
//! scenario type. Output documents written by the CLI embed the same object
//! under a `scenario` key, and are accepted here unchanged. Every error
//! names the key it concerns.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    validate_game, validate_multi, validate_single, GameScenario, MultiPoolScenario,
    SinglePoolScenario,
};

fn file_error(key: &str, message: impl Into<String>) -> Error {
    Error::ScenarioFile {
        key: key.to_string(),
        message: message.into(),
    }
}

struct Fields {
    map: Map<String, Value>,
}

impl Fields {
    fn parse(text: &str, allowed: &[&str]) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| file_error("<document>", e.to_string()))?;
        let mut map = match value {
            Value::Object(m) => m,
            _ => return Err(file_error("<document>", "expected a JSON object")),
        };
        if let Some(Value::Object(inner)) = map.remove("scenario") {
            map = inner;
        } else if let Some(other) = map.get("scenario") {
            return Err(file_error("scenario", format!("expected an object, found {other}")));
        }
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(file_error(key, format!("unknown key; expected one of {allowed:?}")));
        }
        Ok(Fields { map })
    }

    fn number(&self, key: &str) -> Result<f64> {
        match self.map.get(key) {
            None => Err(file_error(key, "missing")),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| file_error(key, format!("expected a number, found {v}"))),
        }
    }

    fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        let arr = match self.map.get(key) {
            None => return Err(file_error(key, "missing")),
            Some(Value::Array(a)) => a,
            Some(v) => return Err(file_error(key, format!("expected an array, found {v}"))),
        };
        arr.iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64()
                    .ok_or_else(|| file_error(&format!("{key}[{i}]"), format!("expected a number, found {v}")))
            })
            .collect()
    }
}

/// Re-labels a validation failure with the key that caused it.
fn cite(err: Error) -> Error {
    match err {
        Error::PowerOutOfRange { field, value, reason } => {
            file_error(&field, format!("value {value} is out of range: {reason}"))
        }
        Error::BudgetExceeded { what, total } => {
            file_error(&what, format!("sums to {total}, which exceeds 1"))
        }
        other => other,
    }
}

pub fn parse_single(text: &str) -> Result<SinglePoolScenario> {
    let f = Fields::parse(text, &["alpha", "beta", "tau", "c"])?;
    let raw = SinglePoolScenario {
        alpha: f.number("alpha")?,
        beta: f.number("beta")?,
        tau: f.number("tau")?,
        c: f.number("c")?,
    };
    validate_single(&raw).map_err(cite)
}

pub fn parse_multi(text: &str) -> Result<MultiPoolScenario> {
    let f = Fields::parse(text, &["alpha", "betas", "taus", "c"])?;
    let raw = MultiPoolScenario {
        alpha: f.number("alpha")?,
        betas: f.numbers("betas")?,
        taus: f.numbers("taus")?,
        c: f.number("c")?,
    };
    validate_multi(&raw).map_err(cite)
}

pub fn parse_game(text: &str) -> Result<GameScenario> {
    let keys = ["alpha1", "alpha2", "f1", "f2", "c1", "c2", "c1p", "c2p"];
    let f = Fields::parse(text, &keys)?;
    let raw = GameScenario {
        alpha1: f.number("alpha1")?,
        alpha2: f.number("alpha2")?,
        f1: f.number("f1")?,
        f2: f.number("f2")?,
        c1: f.number("c1")?,
        c2: f.number("c2")?,
        c1p: f.number("c1p")?,
        c2p: f.number("c2p")?,
    };
    validate_game(&raw).map_err(cite)
}
