//! Machine-readable run reports.
//!
//! Every command emits one JSON report with the tool version, the tolerance
//! values in force, input file digests, a command-specific results payload,
//! and collected warnings. Identical runs produce byte-identical payloads;
//! only the timing field varies.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub shrink_tol: f64,
    pub motion_tol: f64,
    pub weight_floor: f64,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub tolerances: Tolerances,
    pub inputs: Vec<InputDigest>,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn digest_file(&mut self, path: &Path) {
        let sha = fs::read(path)
            .map(|bytes| hex::encode(Sha256::digest(&bytes)))
            .unwrap_or_else(|_| "unreadable".to_string());
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flat key/value rendering for --human.
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command   : {}\n", self.command));
        out.push_str(&format!("version   : {}\n", self.version));
        for input in &self.inputs {
            out.push_str(&format!("input     : {} ({})\n", input.path, &input.sha256[..12.min(input.sha256.len())]));
        }
        render_value(&mut out, "result", &self.results);
        for warning in &self.warnings {
            out.push_str(&format!("warning   : {warning}\n"));
        }
        out.push_str(&format!("timing    : {} ms\n", self.timing_ms));
        out
    }
}

fn render_value(out: &mut String, prefix: &str, value: &serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            for (key, inner) in map {
                render_value(out, &format!("{prefix}.{key}"), inner);
            }
        }
        serde_json::Value::Array(items) if items.len() <= 8 => {
            for (k, inner) in items.iter().enumerate() {
                render_value(out, &format!("{prefix}[{k}]"), inner);
            }
        }
        serde_json::Value::Array(items) => {
            out.push_str(&format!("{prefix}: [{} entries]\n", items.len()));
        }
        other => {
            out.push_str(&format!("{prefix}: {other}\n"));
        }
    }
}
