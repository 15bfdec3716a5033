//! Report serialization and atomic output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

use super::config::RunConfig;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Json(Value),
    Csv(String),
}

impl Report {
    /// JSON report for `cfg` with `fields` at top level.
    pub fn json(cfg: &RunConfig, fields: Value) -> Result<Report> {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        obj.insert("command".into(), json!(cfg.problem.command()));
        match fields {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("result".into(), other);
            }
        }
        let echo = serde_json::to_value(cfg).map_err(|e| Error::Config(format!("config echo: {e}")))?;
        obj.insert("config".into(), echo);
        Ok(Report::Json(Value::Object(obj)))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Report::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
                s.push('\n');
                s.into_bytes()
            }
            Report::Csv(s) => s.clone().into_bytes(),
        }
    }
}

/// `{:.16e}`: 17 significant digits, locale independent.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a header row; every cell is a number.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits() {
        let s = csv(&["x", "y"], [vec![0.1, -2.0]]);
        assert_eq!(s, "x,y\n1.0000000000000001e-1,-2.0000000000000000e0\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
