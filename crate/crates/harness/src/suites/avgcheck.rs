//! Property checks of the averaging machinery: the orthogonal-decomposition identity on
//! random systems, exactness under constant forcing, and quadrature convergence.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use oscavg_core::averaged::{theorem1_diagnostic, AveragedField, AveragingKind, OscillatorySystem, Theorem1Report};
use oscavg_core::averaging::{birkhoff_average, trapezoid_average, SamplingPlan};
use oscavg_core::integrators::rk4;
use oscavg_core::linear::{LinearFlow, SkewHermitianOperator, DEFAULT_ZERO_TOLERANCE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sci, SuiteReport, Table};
use crate::config::ExperimentConfig;
use crate::error::Result;

/// `coef · Π x[vars] · cos(νt + phase)` added to component `out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub out: usize,
    pub coef: f64,
    pub vars: Vec<usize>,
    pub nu: f64,
    pub phase: f64,
}

/// Random `Ω = Q B Qᵀ` with integer block frequencies, and a random polynomial-trigonometric `F`.
pub fn random_system(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<(OscillatorySystem, Vec<f64>)> {
    let blocks = rng.gen_range(1..=(max_dim / 2).max(1));
    let d = 2 * blocks;
    let mut b = DMatrix::<f64>::zeros(d, d);
    let mut freqs = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let nu = rng.gen_range(0..=3) as f64;
        b[(2 * k, 2 * k + 1)] = nu;
        b[(2 * k + 1, 2 * k)] = -nu;
        freqs.push(nu);
    }
    let q = DMatrix::<f64>::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
    let omega = &q * b * q.transpose();
    let op = SkewHermitianOperator::from_real(&omega, DEFAULT_ZERO_TOLERANCE)?;
    let mut terms = Vec::new();
    for out in 0..d {
        for _ in 0..rng.gen_range(1..=4) {
            let degree = rng.gen_range(0..=2);
            terms.push(Term {
                out,
                coef: rng.gen_range(-1.0..1.0),
                vars: (0..degree).map(|_| rng.gen_range(0..d)).collect(),
                nu: rng.gen_range(0..=2) as f64,
                phase: rng.gen_range(0.0..2.0 * PI),
            });
        }
    }
    let forcing: Vec<f64> = {
        let mut f: Vec<f64> = terms.iter().map(|t| t.nu).filter(|nu| *nu > 0.0).collect();
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    };
    let sys = OscillatorySystem::new(op, 0.01, move |x, t| {
        let mut out = vec![0.0; x.len()];
        for term in &terms {
            out[term.out] += term.coef * term.vars.iter().map(|&j| x[j]).product::<f64>() * (term.nu * t + term.phase).cos();
        }
        out
    })
    .with_forcing(forcing);
    Ok((sys, freqs))
}

/// Tolerance checks on one diagnostic.
pub fn theorem1_holds(r: &Theorem1Report) -> bool {
    r.cross.abs() <= 1e-8 * (1.0 + r.norm_f.powi(2))
        && r.norm_g <= r.norm_f + 1e-8
        && r.pythagoras_defect() <= 1e-6 * r.norm_f.powi(2) + 1e-14
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Row {
    pub system: usize,
    pub dim: usize,
    pub state: usize,
    pub report: Theorem1Report,
}

pub fn theorem1_table(seed: u64, systems: usize, states: usize, max_dim: usize, samples: usize) -> Result<Vec<Theorem1Row>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = SamplingPlan::periodic(2.0 * PI, samples);
    let mut rows = Vec::with_capacity(systems * states);
    for system in 0..systems {
        let (sys, _) = random_system(&mut rng, max_dim)?;
        for state in 0..states {
            let x: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            rows.push(Theorem1Row { system, dim: sys.dim(), state, report: theorem1_diagnostic(&sys, &plan, &x)? });
        }
    }
    Ok(rows)
}

/// Errors of the two pipelines on `x' = Ωx + ε(1, 0)` with `Ω` the unit rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantForcingCheck {
    pub improved_max_error: f64,
    pub classical_mean_error: f64,
    /// `ε‖Ω⁻¹C‖`.
    pub reference_scale: f64,
}

pub fn constant_forcing_check(epsilon: f64, t_end: f64, h: f64) -> Result<ConstantForcingCheck> {
    let omega = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    let op = SkewHermitianOperator::from_real(&omega, DEFAULT_ZERO_TOLERANCE)?;
    let sys = Arc::new(OscillatorySystem::new(op, epsilon, |_, _| vec![1.0, 0.0]));
    let plan = SamplingPlan::periodic(2.0 * PI, 16);
    let x0 = [1.0, 0.5];
    let p = sys.operator.pinv_apply(&[1.0, 0.0])?;
    let exact = |t: f64| -> oscavg_core::Result<Vec<f64>> {
        let shifted = [x0[0] + epsilon * p[0], x0[1] + epsilon * p[1]];
        let rot = sys.operator.flow(t, &shifted)?;
        Ok(vec![rot[0] - epsilon * p[0], rot[1] - epsilon * p[1]])
    };
    let mut errors = [Vec::new(), Vec::new()];
    for (k, kind) in [AveragingKind::Improved, AveragingKind::Classical].into_iter().enumerate() {
        let field = AveragedField::new(kind, sys.clone(), plan);
        let z0 = field.lift(&x0)?;
        let traj = rk4(|z, t| field.rate(z, t), &z0, h, t_end, 1)?;
        for (t, z) in traj.times.iter().zip(&traj.states) {
            let x = field.reconstruct(*t, z)?;
            let e = exact(*t)?;
            errors[k].push(((x[0] - e[0]).powi(2) + (x[1] - e[1]).powi(2)).sqrt());
        }
    }
    Ok(ConstantForcingCheck {
        improved_max_error: errors[0].iter().fold(0.0, |m: f64, e| m.max(*e)),
        classical_mean_error: errors[1].iter().sum::<f64>() / errors[1].len() as f64,
        reference_scale: epsilon * (p[0].powi(2) + p[1].powi(2)).sqrt(),
    })
}

/// Trapezoid errors for the mean of `1/(1.1 + cos t)` at each `N`.
pub fn trapezoid_errors(ns: &[usize]) -> Result<Vec<f64>> {
    let exact = 1.0 / (1.1f64 * 1.1 - 1.0).sqrt();
    ns.iter()
        .map(|&n| {
            let avg = trapezoid_average(|t| vec![1.0 / (1.1 + t.cos())], &SamplingPlan::periodic(2.0 * PI, n))?;
            Ok((avg[0] - exact).abs())
        })
        .collect()
}

/// Weighted Birkhoff errors for the mean of `cos t + cos(√2 t)` sampled with unit step.
pub fn birkhoff_errors(ns: &[usize]) -> Result<Vec<f64>> {
    let s2 = 2f64.sqrt();
    ns.iter()
        .map(|&n| {
            let avg = birkhoff_average(|t| vec![t.cos() + (s2 * t).cos()], &SamplingPlan::birkhoff(1.0, n))?;
            Ok(avg[0].abs())
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    let rows = theorem1_table(
        cfg.get("seed")?,
        cfg.get_count("systems")?,
        cfg.get_count("states")?,
        cfg.get_count("max_dim")?.max(2),
        cfg.get_count("samples")?,
    )?;
    let mut report = SuiteReport::default();
    let violations = rows.iter().filter(|r| !theorem1_holds(&r.report)).count();
    report.tables.push(Table {
        name: "theorem1".into(),
        header: vec!["system", "dim", "state", "norm_f", "norm_g", "norm_diff", "cross", "pythagoras_defect", "holds"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.system.to_string(),
                    r.dim.to_string(),
                    r.state.to_string(),
                    sci(r.report.norm_f),
                    sci(r.report.norm_g),
                    sci(r.report.norm_diff),
                    sci(r.report.cross),
                    sci(r.report.pythagoras_defect()),
                    theorem1_holds(&r.report).to_string(),
                ]
            })
            .collect(),
    });
    report.summary.push(("theorem1.rows".into(), rows.len().to_string()));
    report.summary.push(("theorem1.violations".into(), violations.to_string()));
    if violations > 0 {
        report.fail("theorem1", &format!("{violations} rows violate the decomposition identity"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_systems_are_deterministic() {
        let a = theorem1_table(3, 2, 2, 6, 32).unwrap();
        let b = theorem1_table(3, 2, 2, 6, 32).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.dim <= 6 && r.dim % 2 == 0));
    }

    #[test]
    fn trapezoid_converges_geometrically() {
        let e = trapezoid_errors(&[16, 32]).unwrap();
        assert!(e[1] < e[0] * 1e-2);
    }
}
