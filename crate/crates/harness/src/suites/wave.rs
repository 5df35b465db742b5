//! Advection-reaction benchmark: averaged runs with step `h` against a fine benchmark.

use std::sync::Arc;

use oscavg_core::averaged::{AveragedField, AveragingKind};
use oscavg_core::averaging::{tune_samples, SamplingPlan};
use oscavg_core::integrators::{rk4, Trajectory};
use oscavg_core::wavebench::{
    pde_benchmark, pde_exp_integrator, pde_integrating_factor, pde_system, reference_initial, AdvectionParams, Grid2D,
    PdeCase,
};
use rayon::prelude::*;

use super::{timed, MethodRun, SuiteReport, Table};
use crate::config::{ExperimentConfig, Method};
use crate::error::{HarnessError, Result};
use crate::metrics::{error_metrics, ErrorReport, Observable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchmarkScheme {
    Rk4,
    IntegratingFactor,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveSettings {
    pub case: PdeCase,
    pub params: AdvectionParams,
    pub m1: usize,
    pub m2: usize,
    pub t_end: f64,
    pub h: f64,
    pub samples: usize,
    pub birkhoff_step: f64,
    pub tune: bool,
    pub tune_target: f64,
    pub tune_max: usize,
    pub bench_dt: f64,
    pub scheme: BenchmarkScheme,
}

impl WaveSettings {
    pub fn reference(case: PdeCase) -> Self {
        let mut s = Self::from_config(&ExperimentConfig::new(crate::config::Suite::Wave)).expect("defaults are valid");
        s.case = case;
        s
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let case = PdeCase::parse(cfg.get_str("case")?)
            .ok_or_else(|| HarnessError::Config(format!("unknown case `{}` (double, half, quasi)", cfg.get_str("case").unwrap_or(""))))?;
        let scheme = match cfg.get_str("benchmark.scheme")? {
            "rk4" => BenchmarkScheme::Rk4,
            "if" => BenchmarkScheme::IntegratingFactor,
            other => return Err(HarnessError::Config(format!("unknown benchmark scheme `{other}` (rk4, if)"))),
        };
        let h = cfg.get_positive("h")?;
        let bench_dt = cfg.get_positive("benchmark.dt")?;
        if ((h / bench_dt).round() * bench_dt - h).abs() > 1e-9 * h {
            return Err(HarnessError::Config(format!("benchmark.dt = {bench_dt} does not divide h = {h}")));
        }
        Ok(Self {
            case,
            params: AdvectionParams {
                a: cfg.get_f64("a")?,
                b: cfg.get_f64("b")?,
                epsilon: cfg.get_f64("epsilon")?,
                dealias: cfg.get_bool("dealias")?,
            },
            m1: cfg.get_count("M1")?,
            m2: cfg.get_count("M2")?,
            t_end: cfg.get_positive("T")?,
            h,
            samples: cfg.get_count("N")?,
            birkhoff_step: cfg.get_positive("delta_t")?,
            tune: cfg.get_bool("tune")?,
            tune_target: cfg.get_positive("tune.target")?,
            tune_max: cfg.get_count("tune.max")?,
            bench_dt,
            scheme,
        })
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn grid(&self) -> Result<Arc<Grid2D>> {
        Ok(self.case.grid(self.m1, self.m2)?)
    }

    /// The sampling plan, tuned by doubling when requested.
    pub fn plan(&self, grid: &Arc<Grid2D>) -> Result<SamplingPlan> {
        let plan = self.case.plan(self.samples, self.birkhoff_step);
        if !self.tune {
            return Ok(plan);
        }
        let sys = pde_system(&self.params, grid)?;
        Ok(tune_samples(&sys.operator, plan, self.tune_target, self.tune_max)?)
    }
}

pub fn benchmark(s: &WaveSettings) -> Result<Trajectory> {
    let grid = s.grid()?;
    let u0 = reference_initial(&grid);
    let stride = (s.h / s.bench_dt).round() as usize;
    let traj = match s.scheme {
        BenchmarkScheme::Rk4 => pde_benchmark(&s.params, &grid, &u0, s.bench_dt, s.t_end, stride)?,
        BenchmarkScheme::IntegratingFactor => pde_integrating_factor(&s.params, &grid, &u0, s.bench_dt, s.t_end, stride)?,
    };
    Ok(traj)
}

pub fn exp_run(s: &WaveSettings) -> Result<Trajectory> {
    let grid = s.grid()?;
    let u0 = reference_initial(&grid);
    Ok(pde_exp_integrator(&s.params, &grid, &u0, s.h, s.t_end, 1)?)
}

/// RK4 with step `h` on the averaged system, reconstructed after every step.
pub fn averaged_run(s: &WaveSettings, kind: AveragingKind) -> Result<(Trajectory, usize)> {
    let grid = s.grid()?;
    let plan = s.plan(&grid)?;
    let sys = Arc::new(pde_system(&s.params, &grid)?);
    let field = AveragedField::new(kind, sys, plan);
    let u0 = reference_initial(&grid);
    let z0 = field.lift(u0.values())?;
    let traj = rk4(|z, t| field.rate(z, t), &z0, s.h, s.t_end, 1)?;
    Ok((traj.map(|t, z| field.reconstruct(t, z))?, plan.samples))
}

pub fn run_method(s: &WaveSettings, method: Method) -> Result<(Trajectory, usize)> {
    match method {
        Method::Benchmark => benchmark(s).map(|t| (t, 0)),
        Method::Exp => exp_run(s).map(|t| (t, 0)),
        Method::Classical => averaged_run(s, AveragingKind::Classical),
        Method::Improved => averaged_run(s, AveragingKind::Improved),
    }
}

/// Per-step RMS errors against the benchmark.
#[derive(Clone, Debug)]
pub struct WaveComparison {
    pub reports: Vec<(Method, ErrorReport)>,
    pub samples: Vec<(Method, usize)>,
}

impl WaveComparison {
    pub fn mean_error(&self, method: Method) -> Option<f64> {
        self.reports.iter().find(|(m, _)| *m == method).map(|(_, r)| r.means[0])
    }

    /// Classical over improved mean error.
    pub fn improvement(&self) -> Option<f64> {
        Some(self.mean_error(Method::Classical)? / self.mean_error(Method::Improved)?)
    }
}

pub fn compare(runs: &[(Method, Trajectory, usize)]) -> Result<WaveComparison> {
    let bench = runs
        .iter()
        .find(|(m, _, _)| *m == Method::Benchmark)
        .map(|(_, t, _)| t)
        .ok_or_else(|| HarnessError::Config("benchmark method is required for error reports".into()))?;
    let obs = [Observable::rms("u")];
    let mut reports = Vec::new();
    for (m, traj, _) in runs.iter().filter(|(m, _, _)| *m != Method::Benchmark) {
        reports.push((*m, error_metrics(traj, bench, &obs)?));
    }
    let samples = runs.iter().filter(|(_, _, n)| *n > 0).map(|(m, _, n)| (*m, *n)).collect();
    Ok(WaveComparison { reports, samples })
}

/// Runs `methods` (benchmark included) and compares them.
pub fn evaluate(s: &WaveSettings, methods: &[Method]) -> Result<WaveComparison> {
    let runs: Vec<(Method, Trajectory, usize)> = methods
        .par_iter()
        .map(|&m| run_method(s, m).map(|(t, n)| (m, t, n)))
        .collect::<Result<_>>()?;
    compare(&runs)
}

pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let s = WaveSettings::from_config(cfg)?;
    let methods = cfg.methods()?;
    let grid = s.grid()?;
    let results: Vec<(Method, Result<(Trajectory, usize)>, f64)> = methods
        .par_iter()
        .map(|&m| {
            let (r, secs) = timed(|| run_method(&s, m));
            (m, r, secs)
        })
        .collect();
    let mut report = SuiteReport::default();
    let columns: Vec<String> = (0..grid.len()).map(|i| format!("u{}_{}", i / grid.m2, i % grid.m2)).collect();
    let mut ok = Vec::new();
    for (m, r, secs) in results {
        match r {
            Ok((traj, n)) => {
                report.runs.push(MethodRun { method: m.name().into(), columns: columns.clone(), trajectory: traj.clone(), wall_clock: secs });
                ok.push((m, traj, n));
            }
            Err(e) => report.fail(m.name(), &e),
        }
    }
    if let Some((_, traj, _)) = ok.iter().find(|(m, _, _)| *m == Method::Benchmark) {
        report.tables.push(snapshot_table(&grid, traj));
    }
    if ok.iter().any(|(m, _, _)| *m == Method::Benchmark) {
        let cmp = compare(&ok)?;
        for (m, r) in &cmp.reports {
            report.summary.push((format!("{}.mean_error", m.name()), format!("{:.6e}", r.means[0])));
            report.errors.push((m.name().into(), r.clone()));
        }
        for (m, n) in &cmp.samples {
            report.summary.push((format!("{}.samples", m.name()), n.to_string()));
        }
        if let Some(f) = cmp.improvement() {
            report.summary.push(("improvement_factor".into(), format!("{f:.4}")));
        }
    }
    report.summary.push(("error_metric".into(), "grid RMS, mean over output steps after t=0".into()));
    Ok(report)
}

/// Final benchmark field as `(x, y, value)` rows.
fn snapshot_table(grid: &Arc<Grid2D>, traj: &Trajectory) -> Table {
    let (t, last) = traj.last().expect("trajectory has the initial record");
    let rows = grid
        .points()
        .zip(last)
        .map(|((x, y), v)| vec![super::sci(t), super::sci(x), super::sci(y), super::sci(*v)])
        .collect();
    Table { name: "benchmark_snapshot".into(), header: vec!["t", "x", "y", "value"], rows }
}
