//! File formats: JSON schemas for matrices and states, atomic output
//! writing and fixed-precision CSV.
//!
//! Matrices are stored as `{ "dim": n, "entries": [[re, im], ...] }` with
//! row-major entries; serde_json prints floats with round-trip precision, so
//! a serialize/parse cycle reproduces the value bit for bit.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gate::GateParams;
use crate::linalg::{ComplexMatrix, StateVector};

#[derive(Serialize, Deserialize)]
struct GateParamsJson {
    n: usize,
    lambda: Vec<f64>,
    mu: Vec<Vec<f64>>,
    phi: Vec<f64>,
}

impl Serialize for GateParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        GateParamsJson {
            n: self.n(),
            lambda: self.lambda().to_vec(),
            mu: self.mu_rows(),
            phi: self.phi().to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GateParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = GateParamsJson::deserialize(deserializer)?;
        GateParams::new(raw.n, raw.lambda, raw.mu, raw.phi).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.is_square() {
            return Err(serde::ser::Error::custom("only square matrices have a file form"));
        }
        MatrixJson {
            dim: self.rows(),
            entries: self.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let entries: Vec<Complex64> = raw
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_vec(raw.dim, raw.dim, entries).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            dim: self.dim(),
            amplitudes: self.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(deserializer)?;
        if raw.amplitudes.len() != raw.dim {
            return Err(D::Error::custom(format!(
                "state dim {} does not match {} amplitudes",
                raw.dim,
                raw.amplitudes.len()
            )));
        }
        let amplitudes: Vec<Complex64> = raw
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        StateVector::new(amplitudes).map_err(D::Error::custom)
    }
}

/// Reads a matrix file and checks it is unitary within `tol`.
pub fn read_unitary_matrix(path: &Path, tol: f64) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)?;
    let matrix: ComplexMatrix = serde_json::from_str(&text).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let residual = matrix.unitarity_residual();
    if residual > tol {
        return Err(Error::NotUnitary { residual, tol });
    }
    Ok(matrix)
}

/// Writes bytes atomically: temp file in the destination directory, then
/// rename. A failed run never leaves a partial output file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Internal(format!("failed to move output into place: {e}")))?;
    Ok(())
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders a CSV document: header row plus rows of 17-significant-digit
/// floats, in the given order.
pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let formatted: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&formatted.join(","));
        out.push('\n');
    }
    out
}
