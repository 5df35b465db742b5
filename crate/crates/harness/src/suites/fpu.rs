//! Stiff Fermi–Pasta–Ulam chain: benchmark, splitting and averaged runs compared on the
//! slow and fast coordinates and on the stiff-spring energies.

use std::sync::Arc;

use oscavg_core::averaged::{classical_field, AveragedField, AveragingKind};
use oscavg_core::averaging::SamplingPlan;
use oscavg_core::fpu::{
    closed_form_rate, exact_averaged_field, pack_canonical, potential_gradient_into, stiff_energies, to_canonical_form, unpack_canonical, FpuParams,
};
use oscavg_core::integrators::{exp_symmetric2, rk4, symplectic4, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{timed, MethodRun, SuiteReport};
use crate::config::{ExperimentConfig, Method};
use crate::error::Result;
use crate::metrics::{error_metrics, fluctuation_amplitude, ErrorReport, Norm, Observable};

/// Run settings; times `T` and `h` are in the slow time `s`, `exp_h` in `t = ωs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpuSettings {
    pub params: FpuParams,
    pub t_end: f64,
    pub h: f64,
    pub samples: usize,
    pub exp_h: f64,
    pub bench_h: f64,
    pub bench_stride: usize,
}

impl FpuSettings {
    pub fn reference() -> Self {
        Self::from_config(&ExperimentConfig::new(crate::config::Suite::Fpu)).expect("defaults are valid")
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self> {
        let params = FpuParams::new(cfg.get_count("m")?, cfg.get_positive("omega")?)?;
        Ok(Self {
            params,
            t_end: cfg.get_positive("T_factor")? * params.omega,
            h: cfg.get_positive("h")?,
            samples: cfg.get_count("N")?,
            exp_h: cfg.get_positive("exp.h")?,
            bench_h: cfg.get_positive("benchmark.h_factor")? / params.omega,
            bench_stride: cfg.get_count("benchmark.stride")?,
        })
    }

    /// Spacing of recorded states in `s`.
    pub fn record_interval(&self) -> f64 {
        self.bench_h * self.bench_stride as f64
    }

    fn stride_for(&self, step: f64) -> usize {
        ((self.record_interval() / step).round() as usize).max(1)
    }
}

/// `q = 0`, `p₁ = 2`, `p_{m+1} = 1`: energy in the first slow and first stiff mode.
pub fn initial_state(params: &FpuParams) -> (Vec<f64>, Vec<f64>) {
    let m = params.m;
    let mut p = vec![0.0; 2 * m];
    p[0] = 2.0;
    p[m] = 1.0;
    (vec![0.0; 2 * m], p)
}

/// Column names of a `[q, p]` record.
pub fn columns(params: &FpuParams) -> Vec<String> {
    let n = 2 * params.m;
    (1..=n).map(|i| format!("q{i}")).chain((1..=n).map(|i| format!("p{i}"))).collect()
}

/// The five observable groups: slow/fast positions and momenta, and `(I₁, …, I_m)`.
pub fn observables(params: &FpuParams) -> Vec<Observable> {
    let m = params.m;
    let p = *params;
    vec![
        Observable::slice("q_slow", 0..m),
        Observable::slice("q_fast", m..2 * m),
        Observable::slice("p_slow", 2 * m..3 * m),
        Observable::slice("p_fast", 3 * m..4 * m),
        Observable::new("I", Norm::Euclidean, move |x| energies(&p, x)),
    ]
}

fn energies(params: &FpuParams, x: &[f64]) -> Vec<f64> {
    let n = 2 * params.m;
    stiff_energies(params, &x[..n], &x[n..]).expect("record has length 4m")
}

/// Total stiff energy `ΣIᵢ` of a `[q, p]` record.
pub fn total_stiff_energy(params: &FpuParams, x: &[f64]) -> f64 {
    energies(params, x).iter().sum()
}

fn rescale_time(traj: &Trajectory, factor: f64) -> Trajectory {
    Trajectory { times: traj.times.iter().map(|t| t * factor).collect(), states: traj.states.clone() }
}

/// Fourth-order symplectic integration of the full Hamiltonian in `s`.
pub fn benchmark(s: &FpuSettings) -> Result<Trajectory> {
    let (q0, p0) = initial_state(&s.params);
    let params = s.params;
    Ok(symplectic4(|q, f| potential_gradient_into(&params, q, f), &q0, &p0, s.bench_h, s.t_end, s.bench_stride)?)
}

fn to_qp(params: &FpuParams, x: &[f64]) -> oscavg_core::Result<Vec<f64>> {
    let (q, p) = unpack_canonical(params, x)?;
    Ok([q, p].concat())
}

/// Symmetric exponential splitting with step `exp_h` in `t`.
pub fn exp_run(s: &FpuSettings) -> Result<Trajectory> {
    let params = s.params;
    let sys = to_canonical_form(&params)?;
    let (q0, p0) = initial_state(&params);
    let x0 = pack_canonical(&params, &q0, &p0)?;
    let stride = s.stride_for(s.exp_h / params.omega);
    let traj = exp_symmetric2(&sys, &x0, s.exp_h, s.t_end * params.omega, stride)?;
    let qp = traj.map(|_, x| to_qp(&params, x))?;
    Ok(rescale_time(&qp, 1.0 / params.omega))
}

/// RK4 on the averaged system with step `h` in `s`, reconstructed at every record.
pub fn averaged_run(s: &FpuSettings, kind: AveragingKind) -> Result<Trajectory> {
    let params = s.params;
    let sys = Arc::new(to_canonical_form(&params)?);
    let plan = SamplingPlan::periodic(2.0 * std::f64::consts::PI, s.samples);
    let field = AveragedField::new(kind, sys, plan);
    let (q0, p0) = initial_state(&params);
    let z0 = field.lift(&pack_canonical(&params, &q0, &p0)?)?;
    let stride = s.stride_for(s.h);
    let traj = rk4(|z, t| field.rate(z, t), &z0, s.h * params.omega, s.t_end * params.omega, stride)?;
    let qp = traj.map(|t, z| to_qp(&params, &field.reconstruct(t, z)?))?;
    Ok(rescale_time(&qp, 1.0 / params.omega))
}

pub fn run_method(s: &FpuSettings, method: Method) -> Result<Trajectory> {
    match method {
        Method::Benchmark => benchmark(s),
        Method::Exp => exp_run(s),
        Method::Classical => averaged_run(s, AveragingKind::Classical),
        Method::Improved => averaged_run(s, AveragingKind::Improved),
    }
}

/// Errors of every method against the benchmark and the `ΣIᵢ` fluctuation amplitudes.
#[derive(Clone, Debug)]
pub struct FpuComparison {
    pub reports: Vec<(Method, ErrorReport)>,
    pub sum_energy_amplitude: Vec<(Method, f64)>,
}

impl FpuComparison {
    pub fn energy_error(&self, method: Method) -> Option<f64> {
        self.reports.iter().find(|(m, _)| *m == method).and_then(|(_, r)| r.mean_of("I"))
    }

    pub fn amplitude(&self, method: Method) -> Option<f64> {
        self.sum_energy_amplitude.iter().find(|(m, _)| *m == method).map(|(_, a)| *a)
    }
}

pub fn compare(s: &FpuSettings, runs: &[(Method, Trajectory)]) -> Result<FpuComparison> {
    let obs = observables(&s.params);
    let bench = runs.iter().find(|(m, _)| *m == Method::Benchmark).map(|(_, t)| t);
    let mut reports = Vec::new();
    let mut amps = Vec::new();
    for (method, traj) in runs {
        amps.push((*method, fluctuation_amplitude(traj, |x| total_stiff_energy(&s.params, x))));
        if let (Some(b), true) = (bench, *method != Method::Benchmark) {
            reports.push((*method, error_metrics(traj, b, &obs)?));
        }
    }
    Ok(FpuComparison { reports, sum_energy_amplitude: amps })
}

/// Largest deviation, relative to `max(1, ‖exact‖∞)`, between the closed-form averaged
/// field and the trapezoid average with `samples` points over `states` random states.
pub fn closed_form_deviation(omega: f64, samples: usize, states: usize, seed: u64) -> Result<f64> {
    let params = FpuParams::new(3, omega)?;
    let sys = to_canonical_form(&params)?;
    let plan = SamplingPlan::periodic(2.0 * std::f64::consts::PI, samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let y: Vec<f64> = (0..12)
            .map(|i| if (6..9).contains(&i) { rng.gen_range(-1.0..1.0) / omega } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let x: Vec<f64> = y.iter().enumerate().map(|(i, v)| if i >= 9 { v / omega } else { *v }).collect();
        let numeric = closed_form_rate(&params, &classical_field(&sys, &plan, &x)?)?;
        let exact = exact_averaged_field(omega, &y)?;
        let scale = exact.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let dev = numeric.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(dev / scale);
    }
    Ok(worst)
}

pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let s = FpuSettings::from_config(cfg)?;
    let methods = cfg.methods()?;
    let results: Vec<(Method, Result<Trajectory>, f64)> = methods
        .par_iter()
        .map(|&m| {
            let (r, secs) = timed(|| run_method(&s, m));
            (m, r, secs)
        })
        .collect();
    let mut report = SuiteReport::default();
    let mut ok = Vec::new();
    for (m, r, secs) in results {
        match r {
            Ok(traj) => {
                report.runs.push(MethodRun { method: m.name().into(), columns: columns(&s.params), trajectory: traj.clone(), wall_clock: secs });
                ok.push((m, traj));
            }
            Err(e) => report.fail(m.name(), &e),
        }
    }
    let cmp = compare(&s, &ok)?;
    for (m, r) in &cmp.reports {
        for (name, mean) in r.names.iter().zip(&r.means) {
            report.summary.push((format!("{}.mean_error.{name}", m.name()), format!("{mean:.6e}")));
        }
        report.errors.push((m.name().into(), r.clone()));
    }
    for (m, a) in &cmp.sum_energy_amplitude {
        report.summary.push((format!("{}.sum_I_amplitude", m.name()), format!("{a:.6e}")));
    }
    report.summary.push(("amplitude_definition".into(), "half peak-to-trough over the run".into()));
    Ok(report)
}
