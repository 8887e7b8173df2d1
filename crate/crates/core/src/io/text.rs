//! Shared helpers for the line-oriented text formats.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines with their 1-based line numbers.
pub fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

pub fn parse_f64(path: &Path, line: usize, field: &str, what: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| parse_error(path, line, format!("{what}: `{field}` is not a number")))
}

/// `key = value` pairs in file order. Duplicate keys are an error.
pub fn parse_key_values(path: &Path, text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (line, l) in data_lines(text) {
        let (k, v) = l.split_once('=').ok_or_else(|| parse_error(path, line, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(parse_error(path, line, "empty key"));
        }
        if out.iter().any(|(_, seen, _)| seen == k) {
            return Err(parse_error(path, line, format!("duplicate key `{k}`")));
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Resolves `rel` against the directory holding `base`.
pub fn sibling(base: &Path, rel: &str) -> PathBuf {
    let rel = Path::new(rel);
    if rel.is_absolute() {
        rel.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(rel)
    }
}
