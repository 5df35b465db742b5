//! Transducer steady states (truth run and three predictions), the excitation-threshold
//! sweep and the basin-of-attraction scan.

use oscavg_core::averaging::SamplingPlan;
use oscavg_core::cput::{
    basin_scan, cartesian_field, excitation_threshold, fixed_point_numeric, newton_fixed_point, numerical_polar_field,
    perturbative_fixed_point, polar_to_cartesian, rho2_detuned, BasinClock, BasinGrid, BasinSummary, CputCartesianState,
    CputParams, CputPolarState, NumericFixedPoint, REFERENCE_SINK,
};
use oscavg_core::integrators::{rk4, Trajectory};

use super::{sci, timed, MethodRun, SuiteReport, Table};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::stats::steady_state_stats;

pub fn params_from_config(cfg: &ExperimentConfig) -> Result<CputParams> {
    let p = CputParams {
        epsilon: cfg.get_f64("epsilon")?,
        gap: cfg.get_f64("D")?,
        omega: cfg.get_f64("omega")?,
        forcing: cfg.get_f64("F")?,
        alpha: cfg.get_f64("alpha")?,
        beta: cfg.get_f64("beta")?,
        gamma: cfg.get_f64("gamma")?,
        detuning: cfg.get_f64("detuning")?,
    };
    p.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(p)
}

/// Steady-state oscillation parameters: amplitude and mean of `V` and `y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyRow {
    pub v_amplitude: f64,
    pub v_mean: f64,
    pub y_amplitude: f64,
    pub y_mean: f64,
}

/// RK4 of the full Cartesian equations from `[10, 0, 1, 0]`.
pub fn truth_run(p: &CputParams, h: f64, t_end: f64, stride: usize) -> Result<Trajectory> {
    let x0 = [10.0, 0.0, 1.0, 0.0];
    Ok(rk4(
        |x, t| Ok(cartesian_field(p, &CputCartesianState::from_slice(x)?, t)?.to_vec()),
        &x0,
        h,
        t_end,
        stride,
    )?)
}

pub fn truth_row(traj: &Trajectory, window: f64) -> Result<SteadyRow> {
    let v = steady_state_stats(traj, 0, window)?;
    let y = steady_state_stats(traj, 2, window)?;
    Ok(SteadyRow { v_amplitude: v.amplitude, v_mean: v.mean, y_amplitude: y.amplitude, y_mean: y.mean })
}

/// Sink of the closed-form averaged field, started from the perturbative estimate.
pub fn improved_fixed_point(p: &CputParams) -> Result<NumericFixedPoint> {
    let guess = perturbative_fixed_point(p)?.polar_guess(p);
    Ok(fixed_point_numeric(p, &guess)?)
}

pub fn improved_numeric_row(p: &CputParams) -> Result<SteadyRow> {
    let fp = improved_fixed_point(p)?;
    Ok(SteadyRow { v_amplitude: fp.state.rho, v_mean: 0.0, y_amplitude: fp.state.r, y_mean: p.mean_shift(fp.state.rho) })
}

pub fn improved_perturbative_row(p: &CputParams) -> Result<SteadyRow> {
    let pf = perturbative_fixed_point(p)?;
    Ok(SteadyRow { v_amplitude: pf.rho, v_mean: 0.0, y_amplitude: pf.r, y_mean: pf.y_mean })
}

/// Fixed point of the numerically averaged classical field, and the mean and amplitude
/// of its reconstruction sampled over one period.
pub fn classical_row(p: &CputParams, samples: usize) -> Result<(SteadyRow, NumericFixedPoint)> {
    let period = 2.0 * std::f64::consts::PI / p.omega;
    let plan = SamplingPlan::periodic(period, samples);
    let guess = perturbative_fixed_point(p)?.polar_guess(p);
    let fp = newton_fixed_point(
        |x| numerical_polar_field(p, &CputPolarState::from_array(*x), false, &plan),
        guess.to_array(),
        1e-12,
        100,
    )?;
    let n = 4096;
    let (mut vs, mut ys) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let c = polar_to_cartesian(p, &fp.state, period * i as f64 / n as f64, false);
        vs.push(c.v);
        ys.push(c.y);
    }
    let stats = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        (0.5 * (hi - lo), mean)
    };
    let (va, vm) = stats(&vs);
    let (ya, ym) = stats(&ys);
    Ok((SteadyRow { v_amplitude: va, v_mean: vm, y_amplitude: ya, y_mean: ym }, fp))
}

/// `(Δ, F*, ρ²(F*))` at `points` detunings evenly spaced in `[-max, max]`.
pub fn threshold_sweep(p: &CputParams, points: usize, max: f64) -> Vec<(f64, f64, f64)> {
    (0..points)
        .map(|i| {
            let dl = if points == 1 { 0.0 } else { -max + 2.0 * max * i as f64 / (points - 1) as f64 };
            let f = excitation_threshold(p, dl);
            (dl, f, rho2_detuned(&p.with_forcing(f), dl).raw)
        })
        .collect()
}

pub fn basin_grid(name: &str) -> Result<BasinGrid> {
    match name {
        "desk" => Ok(BasinGrid::desk()),
        "full" => Ok(BasinGrid::full()),
        other => Err(HarnessError::Config(format!("unknown basin grid `{other}` (desk, full)"))),
    }
}

pub fn basin_clock(name: &str) -> Result<BasinClock> {
    match name {
        "slow" => Ok(BasinClock::Slow),
        "physical" => Ok(BasinClock::Physical),
        other => Err(HarnessError::Config(format!("unknown basin clock `{other}` (slow, physical)"))),
    }
}

pub fn basin(p: &CputParams, grid: &BasinGrid, h: f64, t_end: f64, clock: BasinClock) -> Result<BasinSummary> {
    Ok(basin_scan(p, grid, h, t_end, clock, &CputPolarState::from_array(REFERENCE_SINK))?)
}

fn row_strings(name: &str, r: &SteadyRow) -> Vec<String> {
    vec![name.to_string(), sci(r.v_amplitude), sci(r.v_mean), sci(r.y_amplitude), sci(r.y_mean)]
}

pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let p = params_from_config(cfg)?;
    let mode = cfg.get_str("mode")?;
    let modes: &[&str] = match mode {
        "steady" => &["steady"],
        "threshold" => &["threshold"],
        "basin" => &["basin"],
        "all" => &["steady", "threshold", "basin"],
        other => return Err(HarnessError::Config(format!("unknown cput mode `{other}` (steady, threshold, basin, all)"))),
    };
    let mut report = SuiteReport::default();
    for m in modes {
        match *m {
            "steady" => steady(cfg, &p, &mut report)?,
            "threshold" => {
                let sweep = threshold_sweep(&p, cfg.get_count("sweep.points")?, cfg.get_f64("sweep.max")?);
                let rows = sweep.iter().map(|(d, f, r)| vec![sci(*d), sci(*f), sci(*r)]).collect();
                report.tables.push(Table { name: "threshold".into(), header: vec!["detuning", "F_threshold", "rho2"], rows });
            }
            _ => {
                let grid = basin_grid(cfg.get_str("basin.grid")?)?;
                let clock = basin_clock(cfg.get_str("basin.clock")?)?;
                let (summary, secs) = timed(|| basin(&p, &grid, cfg.get_positive("basin.h")?, cfg.get_positive("basin.T")?, clock));
                report.timings.push(("basin".into(), secs));
                match summary {
                    Ok(s) => {
                        report.summary.push(("basin.points".into(), s.count.to_string()));
                        report.summary.push(("basin.failures".into(), s.failures.to_string()));
                        report.summary.push(("basin.max_residual".into(), format!("{:.6e}", s.max_residual)));
                        report.summary.push(("basin.max_distance".into(), format!("{:.6e}", s.max_distance)));
                    }
                    Err(e) => report.fail("basin", &e),
                }
            }
        }
    }
    Ok(report)
}

fn steady(cfg: &ExperimentConfig, p: &CputParams, report: &mut SuiteReport) -> Result<()> {
    let (truth, secs) = timed(|| truth_run(p, cfg.get_positive("h")?, cfg.get_positive("T")?, cfg.get_count("stride")?));
    let window = cfg.get_f64("window")?;
    let mut rows = Vec::new();
    match truth.and_then(|t| truth_row(&t, window).map(|r| (t, r))) {
        Ok((traj, row)) => {
            rows.push(row_strings("truth", &row));
            let columns = ["V", "U", "y", "z"].map(String::from).to_vec();
            report.runs.push(MethodRun { method: "truth".into(), columns, trajectory: traj, wall_clock: secs });
        }
        Err(e) => report.fail("truth", &e),
    }
    match classical_row(p, cfg.get_count("samples")?) {
        Ok((row, _)) => rows.push(row_strings("classical", &row)),
        Err(e) => report.fail("classical", &e),
    }
    match improved_numeric_row(p) {
        Ok(row) => rows.push(row_strings("improved_numeric", &row)),
        Err(e) => report.fail("improved_numeric", &e),
    }
    match improved_perturbative_row(p) {
        Ok(row) => rows.push(row_strings("improved_perturbative", &row)),
        Err(e) => report.fail("improved_perturbative", &e),
    }
    report.tables.push(Table { name: "steady".into(), header: vec!["method", "V_amplitude", "V_mean", "y_amplitude", "y_mean"], rows });
    report.summary.push(("amplitude_definition".into(), "half peak-to-trough over the trailing window".into()));
    Ok(())
}
