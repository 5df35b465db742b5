//! Numerical time averages `⟨g⟩` of vector-valued functions of time.
//!
//! Periodic integrands use the composite trapezoid rule over one period, which is
//! spectrally accurate. Quasi-periodic integrands use the weighted Birkhoff average with
//! the bump weight `exp(-1/(τ(1-τ)))`, whose error decays faster than any power of `N`.

use crate::linear::LinearFlow;
use crate::{norm2, Error, Result};

/// How sample times are laid out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingMode {
    /// `N` equally spaced samples over one period (trapezoid rule).
    Periodic { period: f64 },
    /// `N` samples spaced `step` apart, bump-weighted (Birkhoff average).
    Birkhoff { step: f64 },
}

/// Sample layout for one average: mode, sample count and time origin `t₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingPlan {
    pub mode: SamplingMode,
    pub samples: usize,
    pub origin: f64,
}

impl SamplingPlan {
    pub fn periodic(period: f64, samples: usize) -> Self {
        Self { mode: SamplingMode::Periodic { period }, samples, origin: 0.0 }
    }

    pub fn birkhoff(step: f64, samples: usize) -> Self {
        Self { mode: SamplingMode::Birkhoff { step }, samples, origin: 0.0 }
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let spacing = match self.mode {
            SamplingMode::Periodic { period } => period,
            SamplingMode::Birkhoff { step } => step,
        };
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidPlan(format!("non-positive spacing {spacing}")));
        }
        if self.samples == 0 {
            return Err(Error::InvalidPlan("zero samples".into()));
        }
        if !self.origin.is_finite() {
            return Err(Error::InvalidPlan("non-finite origin".into()));
        }
        Ok(())
    }

    /// Sample times `t₀ + iT/N` or `t₀ + iδt`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let dt = match self.mode {
            SamplingMode::Periodic { period } => period / self.samples as f64,
            SamplingMode::Birkhoff { step } => step,
        };
        (0..self.samples).map(move |i| self.origin + i as f64 * dt)
    }

    /// Normalised quadrature weights (summing to one).
    pub fn weights(&self) -> Result<Vec<f64>> {
        self.validate()?;
        match self.mode {
            SamplingMode::Periodic { .. } => Ok(vec![1.0 / self.samples as f64; self.samples]),
            SamplingMode::Birkhoff { .. } => {
                let raw = birkhoff_weights(self.samples);
                let total: f64 = raw.iter().sum();
                if total <= 0.0 {
                    return Err(Error::InvalidPlan("Birkhoff weights vanish".into()));
                }
                Ok(raw.into_iter().map(|w| w / total).collect())
            }
        }
    }
}

/// Unnormalised Birkhoff bump weights `exp(-1/(τ(1-τ)))`, `τ = (i+1)/(N+1)`.
pub fn birkhoff_weights(samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| {
            let tau = (i + 1) as f64 / (samples + 1) as f64;
            (-1.0 / (tau * (1.0 - tau))).exp()
        })
        .collect()
}

struct Summary {
    mean: Vec<f64>,
    scale: f64,
}

fn weighted_sum<E, G>(mut g: G, plan: &SamplingPlan) -> std::result::Result<Summary, E>
where
    E: From<Error>,
    G: FnMut(f64) -> std::result::Result<Vec<f64>, E>,
{
    let weights = plan.weights()?;
    let mut acc: Option<Vec<f64>> = None;
    let mut scale = 0.0f64;
    for (t, w) in plan.times().zip(weights) {
        let v = g(t)?;
        scale = scale.max(norm2(&v));
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| w * x).collect()),
            Some(a) => {
                if a.len() != v.len() {
                    return Err(Error::DimensionMismatch { expected: a.len(), found: v.len() }.into());
                }
                for (ai, vi) in a.iter_mut().zip(&v) {
                    *ai += w * vi;
                }
            }
        }
    }
    Ok(Summary { mean: acc.unwrap_or_default(), scale })
}

/// Weighted average with either rule, for fallible integrands.
pub fn try_average<E, G>(g: G, plan: &SamplingPlan) -> std::result::Result<Vec<f64>, E>
where
    E: From<Error>,
    G: FnMut(f64) -> std::result::Result<Vec<f64>, E>,
{
    weighted_sum(g, plan).map(|s| s.mean)
}

/// Trapezoid average `(1/N) Σ g(t₀ + iT/N)`.
pub fn trapezoid_average<G>(mut g: G, plan: &SamplingPlan) -> Result<Vec<f64>>
where
    G: FnMut(f64) -> Vec<f64>,
{
    if !matches!(plan.mode, SamplingMode::Periodic { .. }) {
        return Err(Error::WrongPlanMode("trapezoid average"));
    }
    try_average(|t| Ok::<_, Error>(g(t)), plan)
}

/// Weighted Birkhoff average over `N` samples spaced `δt`.
pub fn birkhoff_average<G>(mut g: G, plan: &SamplingPlan) -> Result<Vec<f64>>
where
    G: FnMut(f64) -> Vec<f64>,
{
    if !matches!(plan.mode, SamplingMode::Birkhoff { .. }) {
        return Err(Error::WrongPlanMode("Birkhoff average"));
    }
    try_average(|t| Ok::<_, Error>(g(t)), plan)
}

/// Doubles the sample count until the average of `e^{Ωt}` over the non-kernel directions
/// has Frobenius norm at most `target`.
pub fn tune_samples<L: LinearFlow + ?Sized>(
    op: &L,
    template: SamplingPlan,
    target: f64,
    max_samples: usize,
) -> Result<SamplingPlan> {
    template.validate()?;
    let mut plan = template;
    loop {
        let achieved = op.flow_average_residual(&plan)?;
        if achieved <= target {
            return Ok(plan);
        }
        if plan.samples >= max_samples {
            return Err(Error::BudgetExceeded { achieved, plan });
        }
        plan.samples = (plan.samples * 2).min(max_samples);
    }
}

/// Doubles the sample count until the average changes by at most `rel_tol` (relative to
/// the average, with a rounding floor set by the sample magnitudes). Returns the
/// coarsest plan whose average was confirmed by its refinement.
pub fn refine_until_stable<E, G>(
    mut g: G,
    template: SamplingPlan,
    rel_tol: f64,
    max_samples: usize,
) -> std::result::Result<(Vec<f64>, SamplingPlan), E>
where
    E: From<Error>,
    G: FnMut(f64) -> std::result::Result<Vec<f64>, E>,
{
    template.validate()?;
    let mut plan = template;
    let mut coarse = weighted_sum(&mut g, &plan)?;
    loop {
        let fine_plan = plan.with_samples(plan.samples * 2);
        if fine_plan.samples > max_samples {
            let achieved = coarse.scale;
            return Err(Error::BudgetExceeded { achieved, plan }.into());
        }
        let fine = weighted_sum(&mut g, &fine_plan)?;
        let diff: Vec<f64> = fine.mean.iter().zip(&coarse.mean).map(|(a, b)| a - b).collect();
        let change = norm2(&diff);
        let size = norm2(&fine.mean).max(norm2(&coarse.mean));
        let floor = 64.0 * f64::EPSILON * coarse.scale.max(fine.scale);
        if change <= rel_tol * size + floor {
            return Ok((coarse.mean, plan));
        }
        plan = fine_plan;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_exact_with_one_sample() {
        let plan = SamplingPlan::periodic(2.0 * PI, 1);
        assert_eq!(trapezoid_average(|_| vec![3.5], &plan).unwrap(), vec![3.5]);
    }

    #[test]
    fn cos_squared_needs_three_samples() {
        let plan = SamplingPlan::periodic(2.0 * PI, 3);
        let v = trapezoid_average(|t| vec![t.cos().powi(2)], &plan).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn birkhoff_plan_rejected_by_trapezoid() {
        let plan = SamplingPlan::birkhoff(0.1, 10);
        assert!(matches!(trapezoid_average(|_| vec![1.0], &plan), Err(Error::WrongPlanMode(_))));
    }

    #[test]
    fn zero_samples_rejected() {
        let plan = SamplingPlan::periodic(1.0, 0);
        assert!(matches!(trapezoid_average(|_| vec![1.0], &plan), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn birkhoff_weights_are_symmetric() {
        let w = birkhoff_weights(9);
        for i in 0..9 {
            assert!((w[i] - w[8 - i]).abs() <= 1e-12 * w[i]);
        }
        assert!((w[4] - (-4.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn refine_stops_immediately_for_constant() {
        let mut calls = 0;
        let (v, plan) = refine_until_stable(
            |_| {
                calls += 1;
                Ok::<_, Error>(vec![2.0])
            },
            SamplingPlan::periodic(1.0, 4),
            1e-12,
            1024,
        )
        .unwrap();
        assert_eq!(v, vec![2.0]);
        assert_eq!(plan.samples, 4);
        assert_eq!(calls, 4 + 8);
    }

    #[test]
    fn refine_cos_stable_at_two() {
        let (v, plan) = refine_until_stable(
            |t: f64| Ok::<_, Error>(vec![t.cos()]),
            SamplingPlan::periodic(2.0 * PI, 2),
            1e-12,
            1024,
        )
        .unwrap();
        assert_eq!(plan.samples, 2);
        assert!(v[0].abs() < 1e-15);
    }

    #[test]
    fn refine_reports_budget() {
        let r = refine_until_stable(
            |t: f64| Ok::<_, Error>(vec![(1.0 / (1.0001 + t.cos()))]),
            SamplingPlan::periodic(2.0 * PI, 2),
            1e-14,
            64,
        );
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }
}
