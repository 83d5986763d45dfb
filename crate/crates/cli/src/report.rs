//! Run reports and number formatting shared by every subcommand.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bellscope::{Rational, Scenario};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits used for every floating-point number in output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_seconds: f64,
}

/// Everything a subcommand reports. All fields except `timing` depend
/// only on the inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: Option<String>,
    /// `sha256:` followed by the hex digest of the inputs framed as a git blob.
    pub input_hash: String,
    pub inputs: Value,
    pub precision: usize,
    pub results: Value,
    pub timing: Timing,
}

/// Collects inputs and results while a command runs.
pub struct Recorder {
    command: String,
    scenario: Option<String>,
    inputs: Value,
    started: SystemTime,
    clock: Instant,
}

impl Recorder {
    pub fn new(command: &str, inputs: Value) -> Self {
        Recorder {
            command: command.to_owned(),
            scenario: None,
            inputs,
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    pub fn scenario(&mut self, s: Scenario) {
        self.scenario = Some(format!("{},{},{},{}", s.ma(), s.mb(), s.na(), s.nb()));
    }

    pub fn finish(self, results: Value) -> RunReport {
        let canonical = serde_json::to_string(&serde_json::json!({
            "command": self.command,
            "inputs": self.inputs,
        }))
        .expect("inputs serialize");
        RunReport {
            input_hash: git_blob_hash(canonical.as_bytes()),
            command: self.command,
            scenario: self.scenario,
            inputs: self.inputs,
            precision: SIGNIFICANT_DIGITS,
            results,
            timing: Timing {
                started_unix_ms: self
                    .started
                    .duration_since(UNIX_EPOCH)
                    .map_or(0, |d| d.as_millis()),
                elapsed_seconds: number_f64(self.clock.elapsed().as_secs_f64()),
            },
        }
    }
}

/// SHA-256 of `blob <len>\0<content>`, the way git hashes file contents.
pub fn git_blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn number_f64(x: f64) -> f64 {
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// `x` rounded to the output precision, or `null` if it is not finite.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(number_f64(x))
    } else {
        Value::Null
    }
}

/// `x` as text with the output precision.
pub fn fmt_f64(x: f64) -> String {
    number_f64(x).to_string()
}

/// `p/q` in lowest terms, with `q = 1` written out.
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
