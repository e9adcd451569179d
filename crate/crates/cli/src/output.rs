//! Artifact writing. Every file is written to a temporary file inside the
//! output directory and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use qle_core::microscopic::Ensemble;

use crate::config::RunConfig;
use crate::error::CliError;

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::config(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| CliError::config(format!("csv: {e}")))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Check that `dir` exists (creating it if needed) and accepts new files.
pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("output directory {}: {e}", dir.display())))?;
    tempfile::NamedTempFile::new_in(dir).map(drop).map_err(|e| {
        CliError::config(format!(
            "output directory {} not writable: {e}",
            dir.display()
        ))
    })
}

pub fn write_atomic(dir: &Path, file: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let target = dir.join(file);
    let err = |e: std::io::Error| CliError::config(format!("writing {}: {e}", target.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(&target).map_err(|e| err(e.error))?;
    Ok(target)
}

/// The resolved config with the run summary under `"sidecar"`.
pub fn sidecar(config: &RunConfig, summary: Value) -> Result<Vec<u8>, CliError> {
    let mut v = serde_json::to_value(config).map_err(|e| CliError::config(format!("json: {e}")))?;
    let mut side = Map::new();
    side.insert(
        "versions".into(),
        json!({ "qle-cli": env!("CARGO_PKG_VERSION"), "qle-core": qle_core::VERSION }),
    );
    if let Value::Object(extra) = summary {
        side.extend(extra);
    }
    if let Value::Object(map) = &mut v {
        map.insert("sidecar".into(), Value::Object(side));
    }
    let mut out =
        serde_json::to_vec_pretty(&v).map_err(|e| CliError::config(format!("json: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Magic bytes opening a raw ensemble dump.
pub const ENSEMBLE_MAGIC: &[u8; 8] = b"QLEENS01";

/// Raw trajectories, all little-endian:
///
/// ```text
/// magic    [u8; 8]  "QLEENS01"
/// n_bath   u64
/// n_traj   u64
/// n_times  u64
/// dt       f64
/// T        f64
/// seed     u64
/// then per trajectory: x[n_times], v[n_times], force[n_times] as f64
/// ```
pub fn ensemble_dump(ens: &Ensemble) -> Vec<u8> {
    let n_t = ens.times.len();
    let mut out = Vec::with_capacity(56 + ens.trajectories.len() * n_t * 24);
    out.extend_from_slice(ENSEMBLE_MAGIC);
    out.extend_from_slice(&(ens.n_bath as u64).to_le_bytes());
    out.extend_from_slice(&(ens.trajectories.len() as u64).to_le_bytes());
    out.extend_from_slice(&(n_t as u64).to_le_bytes());
    let dt = if n_t > 1 {
        ens.times[1] - ens.times[0]
    } else {
        0.0
    };
    out.extend_from_slice(&dt.to_le_bytes());
    out.extend_from_slice(&ens.temperature.to_le_bytes());
    out.extend_from_slice(&ens.seed.to_le_bytes());
    for tr in &ens.trajectories {
        for series in [&tr.x, &tr.v, &tr.force] {
            for v in series.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, -2.5e-300, 1.0 / 3.0, 6.266e-24, f64::MAX] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_has_header_and_plain_decimals() {
        let mut t = Table::new(&["t", "x"]);
        t.push(vec![num(0.5), num(1234.5)]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "t,x\n5e-1,1.2345e3\n");
    }

    #[test]
    fn atomic_write_leaves_only_target() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.csv", b"x\n").unwrap();
        write_atomic(dir.path(), "a.csv", b"y\n").unwrap();
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from("a.csv")]);
        assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), b"y\n");
    }
}
