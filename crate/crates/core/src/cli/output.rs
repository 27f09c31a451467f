//! Artifact formatting: CSV and JSON, UTF-8, LF line endings, floats with
//! 17 significant digits.

use std::fmt::Write;

use serde_json::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PACKAGE: &str = env!("CARGO_PKG_NAME");

/// 17 significant digits; negative zero prints as zero, `NaN`/`inf`
/// spelled out.
pub fn float(x: f64) -> String {
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// CSV table with a `# <package> <version> config=<hash>` first line and
/// optional extra comment lines.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config_hash: &str, comments: &[String], columns: &[&str]) -> Self {
        let mut text = format!("# {PACKAGE} {VERSION} config={config_hash}\n");
        for c in comments {
            text.push_str("# ");
            text.push_str(c);
            text.push('\n');
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Pretty JSON with every float printed by [`float`]; non-finite floats
/// become `null`.
pub fn json(value: &Value) -> String {
    let mut out = String::new();
    emit(value, 0, &mut out);
    out.push('\n');
    out
}

fn emit(value: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if num.is_f64() {
                let x = num.as_f64().unwrap_or(f64::NAN);
                out.push_str(&if x.is_finite() { float(x) } else { "null".into() });
            } else {
                let _ = write!(out, "{num}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(depth + 1, out);
                emit(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                emit(v, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}
