use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub params: Value,
    pub expected: Value,
    pub observed: Value,
    /// `None` for exact checks.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn exact(name: impl Into<String>, params: Value, expected: Value, observed: Value) -> Self {
        let pass = expected == observed;
        Self { name: name.into(), params, expected, observed, tolerance: None, pass }
    }

    /// Passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, params: Value, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            params,
            expected: json!({ "below": tolerance }),
            observed: json!(value),
            tolerance: Some(tolerance),
            pass: value < tolerance,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        params: Value,
        expected: Value,
        observed: Value,
        tolerance: Option<f64>,
        pass: bool,
    ) -> Self {
        Self { name: name.into(), params, expected, observed, tolerance, pass }
    }

    /// A check that could not be run.
    pub fn error(name: impl Into<String>, params: Value, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            params,
            expected: Value::Null,
            observed: json!({ "error": err.to_string() }),
            tolerance: None,
            pass: false,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Runtime {
    pub wall_clock_ms: u64,
    pub threads: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cache: Vec<Value>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Omitted in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Runtime>,
}

impl Report {
    pub fn new(command: &str, config: Value, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "hyperrho",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config,
            pass,
            checks,
            runtime: None,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
