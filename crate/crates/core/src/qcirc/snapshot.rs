//! Binary statevector snapshots: little-endian interleaved `f64` pairs
//! `(re, im)` plus a JSON sidecar `{"N", "n"}` next to the data file.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Statevector;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub n: usize,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `path` and `path.json`.
pub fn write_snapshot(path: &Path, psi: &Statevector) -> Result<()> {
    let mut bytes = Vec::with_capacity(psi.amps().len() * 16);
    for a in psi.amps() {
        bytes.extend_from_slice(&a.re.to_le_bytes());
        bytes.extend_from_slice(&a.im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let header = SnapshotHeader { modulus: psi.modulus(), n: psi.registers() };
    fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Statevector> {
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Parse(format!("snapshot of {} bytes is not a whole number of amplitudes", bytes.len())));
    }
    let amps = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Statevector::new(header.modulus, header.n, amps)
}
