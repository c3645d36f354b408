pub mod analytic;
pub mod bounds;
pub mod game;
pub mod sim;

use std::path::Path;

use crate::Failure;

pub fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn to_value(v: &impl serde::Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("plain data serializes")
}
