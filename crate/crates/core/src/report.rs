//! Machine-readable verification reports.

use serde::Serialize;

use crate::corelin::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 15 significant digits and maps `-0.0` to `0.0`.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse::<f64>().unwrap_or(x) + 0.0
}

/// Serializes `value` with every float passed through [`round15`]. Field
/// order follows the struct declaration.
pub fn rounded_json<T: Serialize>(value: &T) -> serde_json::Value {
    fn walk(v: serde_json::Value) -> serde_json::Value {
        use serde_json::Value;
        match v {
            Value::Number(n) if n.is_f64() => n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round15(x)))
                .map_or(Value::Null, Value::Number),
            Value::Array(a) => Value::Array(a.into_iter().map(walk).collect()),
            Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, walk(v))).collect()),
            other => other,
        }
    }
    walk(serde_json::to_value(value).expect("plain data serializes"))
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

/// How `observed` is judged against `expected` and `tolerance`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|observed − expected| ≤ tolerance`.
    AbsDiff,
    /// `observed ≤ expected`.
    AtMost,
    /// `observed ≥ expected`.
    AtLeast,
    /// Recorded for comparison only; always passes.
    Report,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub relation: Relation,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(id: &str, anchor: &str, relation: Relation, expected: f64, observed: f64, tolerance: f64) -> Self {
        let pass = match relation {
            Relation::AbsDiff => (observed - expected).abs() <= tolerance,
            Relation::AtMost => observed <= expected,
            Relation::AtLeast => observed >= expected,
            Relation::Report => true,
        };
        Check {
            id: id.to_string(),
            anchor: anchor.to_string(),
            relation,
            expected: round15(expected),
            observed: round15(observed),
            tolerance: round15(tolerance),
            pass,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<48} observed={:e} expected={:e} tol={:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.observed,
            self.expected,
            self.tolerance
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub seed: u64,
    pub rounds: u64,
    pub truncation: usize,
    pub tol_structural: f64,
    pub tol_assert: f64,
}

impl Environment {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            structural: self.tol_structural,
            equality: self.tol_assert,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: String,
    pub status: Status,
    pub passed: usize,
    pub failed: usize,
    pub environment: Environment,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    /// Sorts checks by id and derives the overall status.
    pub fn new(suite: &str, environment: Environment, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let failed = checks.iter().filter(|c| !c.pass).count();
        SuiteReport {
            schema_version: SCHEMA_VERSION,
            suite: suite.to_string(),
            status: if failed == 0 { Status::Pass } else { Status::Fail },
            passed: checks.len() - failed,
            failed,
            environment,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
