//! JSON report rendering with full-precision floats.
//!
//! `serde_json` prints floats in shortest-round-trip form; the contract for
//! this tool is 17 significant digits on every floating value, so reports are
//! serialized to a tree first and printed by a small walker that formats
//! every non-integer number through [`mourre_core::f17`].

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

/// Render a report as pretty-printed JSON, floats in 17-digit scientific
/// notation, with a trailing newline.
pub fn render(report: &impl Serialize) -> Result<String, Failure> {
    let value = serde_json::to_value(report)
        .map_err(|e| Failure::Validation(format!("report serialization: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            // Integers keep their exact form; everything else gets the
            // fixed 17-significant-digit scientific layout, which is still
            // a valid JSON number.
            if n.is_f64() {
                out.push_str(&mourre_core::f17(n.as_f64().expect("checked f64")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                write_value(out, item, indent + 1);
            }
            newline(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            newline(out, indent);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}
