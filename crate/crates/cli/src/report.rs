use std::fmt;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Process exit codes. These are a stable contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exit {
    Ok = 0,
    Internal = 1,
    /// Unreadable or malformed input, unknown geometry key, bad flags.
    Input = 2,
    /// The input violates a structural requirement: the surface relation,
    /// `d² = 0`, or the filtration axioms.
    Structure = 3,
    /// Two independent computations disagree.
    Disagreement = 4,
    Inadmissible = 5,
    Escape = 6,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        Failure { exit, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.to_string(), passed, detail: detail.into() }
    }
}

/// What a command produced, before the process-level fields are attached.
#[derive(Debug)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    /// Text for humans; the results block is rendered when this is empty.
    pub text: String,
    /// Set when the run produced a report but must still exit nonzero.
    pub failure: Option<Failure>,
}

impl Outcome {
    pub fn new(results: Value, checks: Vec<Check>, text: String) -> Self {
        Outcome { results, checks, text, failure: None }
    }

    pub fn failing(mut self, exit: Exit, message: impl Into<String>) -> Self {
        self.failure = Some(Failure::new(exit, message));
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Inputs {
    pub sha256: String,
    pub settings: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Everything except `timing` depends only on the inputs and flags.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Inputs,
    pub results: Value,
    pub verification: Vec<Check>,
    pub exit: Exit,
    pub timing: Timing,
}

impl RunReport {
    pub fn new(command: Vec<String>, inputs: Inputs, outcome: &Outcome, elapsed: Duration) -> Self {
        RunReport {
            command,
            inputs,
            results: outcome.results.clone(),
            verification: outcome.checks.clone(),
            exit: outcome.failure.as_ref().map_or(Exit::Ok, |f| f.exit),
            timing: Timing { elapsed_ms: elapsed.as_secs_f64() * 1e3 },
        }
    }
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn render_checks(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        out.push_str(&format!("[{mark}] {}: {}\n", c.name, c.detail));
    }
    out
}
