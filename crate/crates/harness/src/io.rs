//! CSV and metadata writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use oscavg_core::integrators::Trajectory;

use crate::error::{HarnessError, Result};
use crate::metrics::ErrorReport;

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// One row per recorded state, time first.
pub fn write_trajectory(path: &Path, columns: &[String], traj: &Trajectory) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt(*t)];
        row.extend(s.iter().map(|v| fmt(*v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Per-time errors, one column per observable.
pub fn write_errors(path: &Path, report: &ErrorReport) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend(report.names.iter().cloned());
    w.write_record(&header)?;
    for (i, t) in report.times.iter().enumerate() {
        let mut row = vec![fmt(*t)];
        row.extend(report.errors.iter().map(|col| fmt(col[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Generic table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Flat `key=value` lines.
pub fn write_metadata(path: &Path, entries: &[(String, String)]) -> Result<()> {
    create_parent(path)?;
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    for (k, v) in entries {
        writeln!(f, "{k}={v}").map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(())
}

/// Parses a metadata file back into pairs.
pub fn read_metadata(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/traj.csv");
        let mut traj = Trajectory::default();
        traj.push(0.0, vec![1.0, 2.0]);
        traj.push(0.5, vec![0.1, -3.0]);
        write_trajectory(&path, &["a".into(), "b".into()], &traj).unwrap();
        let mut r = csv::Reader::from_path(&path).unwrap();
        assert_eq!(r.headers().unwrap(), vec!["t", "a", "b"]);
        let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][2].parse::<f64>().unwrap(), -3.0);
    }

    #[test]
    fn metadata_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.txt");
        let entries = vec![("a".to_string(), "1".to_string()), ("b.c".to_string(), "x=y".to_string())];
        write_metadata(&path, &entries).unwrap();
        assert_eq!(read_metadata(&path).unwrap(), entries);
    }
}
