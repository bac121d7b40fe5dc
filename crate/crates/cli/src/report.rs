use std::fmt;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use troplin::slopes::VerdictStatus;

/// Outcome class of a command, mapped onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Refuted,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::Refuted => 1,
            Status::Inconclusive => 2,
            Status::Error => 3,
        }
    }
}

impl From<VerdictStatus> for Status {
    fn from(s: VerdictStatus) -> Self {
        match s {
            VerdictStatus::Verified => Status::Verified,
            VerdictStatus::Refuted => Status::Refuted,
            VerdictStatus::Inconclusive => Status::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

impl InputHash {
    pub fn new(path: &str, bytes: &[u8]) -> Self {
        InputHash {
            path: path.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The JSON report of one run. Timing goes to stderr so that reports stay
/// byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputHash>,
    pub seed: u64,
    pub status: Status,
    pub result: Value,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        // Through `Value` so that keys come out sorted.
        let v = serde_json::to_value(self).expect("reports serialize");
        let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Failures that are not verdicts.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input.
    Input(String),
    /// A configured cap was exceeded.
    Cap(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Cap(m) => write!(f, "cap exceeded: {m}"),
        }
    }
}

impl From<troplin::io::IoError> for CliError {
    fn from(e: troplin::io::IoError) -> Self {
        CliError::Input(e.to_string())
    }
}
