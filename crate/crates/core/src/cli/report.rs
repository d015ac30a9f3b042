//! Versioned JSON reports with a config hash and diff-stable floats.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config: &'a C,
    /// SHA-256 of the compact config JSON.
    pub config_hash: String,
    pub result: &'a R,
}

/// Compact JSON with every float written as `{:.16e}` (17 significant digits).
struct FixedFloats {
    inner: CompactFormatter,
    depth: usize,
}

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth += 1;
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth -= 1;
        self.inner.end_object(w)?;
        if self.depth == 0 {
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        FixedFloats {
            inner: CompactFormatter,
            depth: 0,
        },
    );
    value
        .serialize(&mut ser)
        .map_err(|e| Error::validation(format!("report serialisation: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    let canonical = to_json(config)?;
    Ok(format!("{:x}", Sha256::digest(canonical.as_bytes())))
}

pub fn render<C: Serialize, R: Serialize>(command: &str, config: &C, result: &R) -> Result<String> {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        config_hash: config_hash(config)?,
        result,
    };
    to_json(&report)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// CSV with a header row; values are written with `{:.16e}` when numeric.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Value>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Keys of a JSON object tree in document order, with nesting shown by `.`; used by the schema test.
pub fn schema_keys(value: &Value) -> Vec<String> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    out.push(path.clone());
                    walk(&path, child, out);
                }
            }
            Value::Array(items) => {
                if let Some(first) = items.first() {
                    walk(&format!("{prefix}[]"), first, out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(&serde_json::json!({"x": 0.1, "y": [1.0, 2.5e-300]})).unwrap();
        assert_eq!(s, "{\"x\":1.0000000000000001e-1,\"y\":[1.0000000000000000e0,2.5000000000000000e-300]}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn hash_is_stable() {
        let c = serde_json::json!({"n": 3, "p": 2.0});
        assert_eq!(config_hash(&c).unwrap(), config_hash(&c.clone()).unwrap());
        assert_ne!(config_hash(&c).unwrap(), config_hash(&serde_json::json!({"n": 4, "p": 2.0})).unwrap());
    }
}
