//! Little-endian binary file helpers shared by all on-disk containers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::Scalar;

/// Writes `values` as little-endian `f32`, narrowing from `T`.
pub fn write_f32<T: Scalar>(path: &Path, values: &[T]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        let x = v.to_f32().unwrap_or(f32::NAN);
        buf.extend_from_slice(&x.to_le_bytes());
    }
    write_atomic(path, &buf)
}

/// Reads a little-endian `f32` file, widening into `T`. The expected element
/// count comes from the container header; a mismatch is a truncation error.
pub fn read_f32<T: Scalar>(path: &Path, expected: usize) -> Result<Vec<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    check_len(path, bytes.len() as u64, expected as u64 * 4)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| crate::num::cast(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
        .collect())
}

/// Writes `values` as little-endian `f64`.
pub fn write_f64<T: Scalar>(path: &Path, values: &[T]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        let x = v.to_f64().unwrap_or(f64::NAN);
        buf.extend_from_slice(&x.to_le_bytes());
    }
    write_atomic(path, &buf)
}

/// Reads a little-endian `f64` file of exactly `expected` elements.
pub fn read_f64<T: Scalar>(path: &Path, expected: usize) -> Result<Vec<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    check_len(path, bytes.len() as u64, expected as u64 * 8)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            crate::num::cast(f64::from_le_bytes([
                c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7],
            ]))
        })
        .collect())
}

/// Writes raw bytes (one byte per label).
pub fn write_u8(path: &Path, values: &[u8]) -> Result<()> {
    write_atomic(path, values)
}

/// Reads a raw byte file of exactly `expected` elements.
pub fn read_u8(path: &Path, expected: usize) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    check_len(path, bytes.len() as u64, expected as u64)?;
    Ok(bytes)
}

/// Serializes `value` as pretty JSON at `path`.
pub fn write_json<S: serde::Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Reads and deserializes JSON from `path`.
pub fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

fn check_len(path: &Path, actual: u64, expected: u64) -> Result<()> {
    if actual != expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual,
        });
    }
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))?;
    Ok(())
}
