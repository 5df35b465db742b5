//! Experiment suites and the common output layout.

pub mod avgcheck;
pub mod cput;
pub mod fpu;
pub mod wave;

use std::path::Path;
use std::time::Instant;

use oscavg_core::integrators::Trajectory;

use crate::config::{ExperimentConfig, Suite};
use crate::error::Result;
use crate::io::{write_errors, write_metadata, write_table, write_trajectory};
use crate::metrics::ErrorReport;

/// One method's recorded trajectory.
#[derive(Clone, Debug)]
pub struct MethodRun {
    pub method: String,
    pub columns: Vec<String>,
    pub trajectory: Trajectory,
    pub wall_clock: f64,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Everything a suite produces.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub runs: Vec<MethodRun>,
    pub errors: Vec<(String, ErrorReport)>,
    pub tables: Vec<Table>,
    pub summary: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
    pub failures: Vec<(String, String)>,
}

impl SuiteReport {
    pub(crate) fn fail(&mut self, method: &str, err: &dyn std::fmt::Display) {
        log::error!("{method} failed: {err}");
        self.failures.push((method.to_string(), err.to_string()));
    }

    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }

    /// Writes trajectories, error files, tables and `metadata.txt` into `dir`.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
        let suite = cfg.suite.name();
        for run in &self.runs {
            write_trajectory(&dir.join(format!("{suite}_{}.csv", run.method)), &run.columns, &run.trajectory)?;
        }
        for (method, report) in &self.errors {
            write_errors(&dir.join(format!("{suite}_{method}_errors.csv")), report)?;
        }
        for table in &self.tables {
            write_table(&dir.join(format!("{suite}_{}.csv", table.name)), &table.header, &table.rows)?;
        }
        let mut meta = cfg.entries();
        meta.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
        meta.extend(self.summary.iter().cloned());
        for run in &self.runs {
            meta.push((format!("wall_clock.{}", run.method), format!("{:.3}", run.wall_clock)));
        }
        for (name, secs) in &self.timings {
            meta.push((format!("wall_clock.{name}"), format!("{secs:.3}")));
        }
        for (method, err) in &self.failures {
            meta.push((format!("failure.{method}"), err.clone()));
        }
        write_metadata(&dir.join(format!("{suite}_metadata.txt")), &meta)
    }
}

pub(crate) fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

pub(crate) fn sci(v: f64) -> String {
    format!("{v:.10e}")
}

/// Runs the configured suite.
pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    match cfg.suite {
        Suite::Cput => cput::run(cfg),
        Suite::Fpu => fpu::run(cfg),
        Suite::Wave => wave::run(cfg),
        Suite::Avgcheck => avgcheck::run(cfg),
    }
}
