//! CSV and JSON writers. Floats carry 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagator::{KickEvent, Trajectory};

pub const TRAJECTORY_HEADER: [&str; 6] = ["s", "t_over_Trot", "expectation", "projection_sq", "norm", "leakage"];
pub const KICKS_HEADER: [&str; 5] = ["kick_index", "s_time", "t_over_Trot", "area", "value_at_kick"];

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &trajectory.samples {
        w.write_record([
            fmt(s.s),
            fmt(s.t_over_trot),
            fmt(s.expectation),
            s.projection_sq.map(fmt).unwrap_or_default(),
            fmt(s.norm),
            fmt(s.leakage),
        ])?;
    }
    finish(w, path)
}

pub fn write_kicks(path: &Path, kicks: &[KickEvent<f64>], values: &[f64], epsilon: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(KICKS_HEADER)?;
    for (i, k) in kicks.iter().enumerate() {
        w.write_record([
            i.to_string(),
            fmt(k.s_time),
            fmt(k.t_over_trot(epsilon)),
            fmt(k.area),
            values.get(i).copied().map(fmt).unwrap_or_default(),
        ])?;
    }
    finish(w, path)
}

/// Arbitrary rows under a header; every row must match the header length.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt(x)))?;
    }
    finish(w, path)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = create(path)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(f, "{text}").map_err(|e| Error::io(path, e))
}

pub fn join(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-2.0), "-2.0000000000000000e0");
        let back: f64 = fmt(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_table(&blocker.join("sub/t.csv"), &["a"], &[vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::Io { .. }) && err.is_config());
    }
}
