use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "gma-report/1";
pub const BINARY_MAGIC: &[u8; 4] = b"GMA1";

#[derive(Serialize)]
pub struct Report<'a> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub status: &'a str,
    pub config: &'a RunConfig,
    pub result: Value,
    /// Omitted under `--deterministic` so that reports compare byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON to `path`, or to stdout.
pub fn emit(report: &Report<'_>, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Io(e.to_string()))?;
    match path {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| CliError::io(p, e))
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Shortest representation that parses back to the same bits; independent of locale.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut body = header.join(",");
    body.push('\n');
    for r in rows {
        body.push_str(&r.iter().map(|&v| format_f64(v)).collect::<Vec<_>>().join(","));
        body.push('\n');
    }
    write_text(path, &body)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// 16-byte header `"GMA1"`, then little-endian `u32` spatial dimension, row count and
/// column count, followed by the rows as little-endian `f64`, row-major.
pub fn write_binary(path: &Path, dims: u32, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Io("binary dump rows have different lengths".into()));
    }
    let mut buf = Vec::with_capacity(16 + 8 * cols * rows.len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&dims.to_le_bytes());
    buf.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    for v in rows.iter().flatten() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut w = create(path)?;
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Reads a dump written by [`write_binary`]: `(dims, rows)`.
#[cfg(test)]
pub fn read_binary(bytes: &[u8]) -> Option<(u32, Vec<Vec<f64>>)> {
    if bytes.len() < 16 || &bytes[..4] != BINARY_MAGIC {
        return None;
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let (dims, nrows, ncols) = (word(4), word(8) as usize, word(12) as usize);
    if bytes.len() != 16 + 8 * nrows * ncols {
        return None;
    }
    let vals: Vec<f64> = bytes[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Some((dims, if ncols == 0 { Vec::new() } else { vals.chunks(ncols).map(<[f64]>::to_vec).collect() }))
}

/// `["x1", .., "xn"]` followed by `extra`.
pub fn coordinate_header(n: usize, extra: &[&str]) -> Vec<String> {
    (1..=n).map(|a| format!("x{a}")).chain(extra.iter().map(|s| s.to_string())).collect()
}

/// JSON numbers cannot hold NaN or infinities; those become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(format_f64(x))
    }
}
