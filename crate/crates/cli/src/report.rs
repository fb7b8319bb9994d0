//! Report envelope, digests and the two output formats.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Human,
}

#[derive(Debug, Serialize)]
pub struct Report {
    /// Tool metadata; excluded from golden comparisons.
    pub header: Value,
    pub command: String,
    pub arguments: Value,
    pub input_digest: String,
    pub precision: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub exit_status: i32,
}

impl Report {
    pub fn new(command: &str, arguments: Value, inputs: &[&[u8]], bits: u32) -> Self {
        Report {
            header: json!({ "tool": "momentkit", "version": env!("CARGO_PKG_VERSION") }),
            command: command.to_string(),
            arguments,
            input_digest: digest(inputs),
            precision: json!({ "bits": bits, "floats": "f64, shortest round-trip decimal" }),
            results: Value::Null,
            warnings: Vec::new(),
            exit_status: 0,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes") + "\n",
            Format::Human => self.human(),
        }
    }

    fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "momentkit {}", self.command);
        let _ = writeln!(out, "input: {}", self.input_digest);
        let _ = writeln!(out, "precision: {} bits", self.precision["bits"]);
        render_value(&mut out, &self.results, 0);
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "exit status: {}", self.exit_status);
        out
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => render_map(out, map, indent),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match scalar_text(item) {
                    Some(t) => {
                        let _ = writeln!(out, "{pad}[{i}] {t}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}[{i}]");
                        render_value(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar_text(other).unwrap_or_default());
        }
    }
}

fn render_map(out: &mut String, map: &Map<String, Value>, indent: usize) {
    let pad = "  ".repeat(indent);
    for (k, v) in map {
        if let Some(t) = scalar_text(v) {
            let _ = writeln!(out, "{pad}{k}: {t}");
            continue;
        }
        if let Value::Array(items) = v {
            if let Some(row) = items.iter().map(scalar_text).collect::<Option<Vec<_>>>() {
                let _ = writeln!(out, "{pad}{k}: [{}]", row.join(", "));
                continue;
            }
        }
        let _ = writeln!(out, "{pad}{k}:");
        render_value(out, v, indent + 1);
    }
}

/// SHA-256 over the length-prefixed input files, in argument order.
pub fn digest(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// `a+bi` with shortest round-trip components.
pub fn complex_text(z: Complex64) -> String {
    // adding 0.0 turns -0.0 into 0.0
    let (re, im) = (z.re + 0.0, z.im + 0.0);
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", re, sign, im.abs())
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}
