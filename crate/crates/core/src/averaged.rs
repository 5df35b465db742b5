//! Classical and improved first-order averaged vector fields.
//!
//! For `x' = Ωx + εF(x, t)` the classical averaged field is
//! `F̄(y) = ⟨e^{-Ωt} F(e^{Ωt}y, t)⟩`. The improved field first removes the bounded
//! oscillation `εP(z)`, with `P = Ω̂⁻¹⟨F(e^{Ωt}z, t)⟩`, and averages
//! `e^{-Ωt}(F(e^{Ωt}z - εP, t) - ΩP)`.

use std::sync::Arc;

use crate::averaging::{try_average, SamplingPlan};
use crate::linear::{LinearFlow, SkewHermitianOperator};
use crate::{check_len, Error, Result};

/// Nonlinearity `F(x, t)`.
pub type Nonlinearity = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// `x' = Ωx + εF(x, t)`.
#[derive(Clone)]
pub struct OscillatorySystem<L = SkewHermitianOperator> {
    pub operator: L,
    pub epsilon: f64,
    pub nonlinearity: Nonlinearity,
    /// Frequencies at which `F` depends on `t`; empty for autonomous systems.
    pub forcing_frequencies: Vec<f64>,
}

impl<L: LinearFlow> OscillatorySystem<L> {
    pub fn new(
        operator: L,
        epsilon: f64,
        nonlinearity: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { operator, epsilon, nonlinearity: Arc::new(nonlinearity), forcing_frequencies: Vec::new() }
    }

    pub fn with_forcing(mut self, frequencies: Vec<f64>) -> Self {
        self.forcing_frequencies = frequencies;
        self
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn is_autonomous(&self) -> bool {
        self.forcing_frequencies.is_empty()
    }

    /// Evaluates `F(x, t)` and checks the output length.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let f = (self.nonlinearity)(x, t);
        check_len(self.dim(), f.len())?;
        Ok(f)
    }

    /// Full right-hand side `Ωx + εF(x, t)`.
    pub fn rhs(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let lin = self.operator.apply(x)?;
        let f = self.eval(x, t)?;
        Ok(lin.iter().zip(&f).map(|(a, b)| a + self.epsilon * b).collect())
    }

    /// Spot-checks that `F` is finite and, for autonomous systems, independent of `t`.
    pub fn spot_check(&self, states: &[Vec<f64>], times: &[f64]) -> Result<()> {
        for x in states {
            let f0 = self.eval(x, 0.0)?;
            for &t in times {
                let f = self.eval(x, t)?;
                if f.iter().any(|v| !v.is_finite()) {
                    return Err(Error::DomainError(format!("F is not finite at t = {t}")));
                }
                if self.is_autonomous() && f.iter().zip(&f0).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs())) {
                    return Err(Error::DomainError("F depends on t but no forcing frequency was declared".into()));
                }
            }
        }
        Ok(())
    }
}

/// Which averaged field drives the slow dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AveragingKind {
    Classical,
    Improved,
}

impl AveragingKind {
    pub fn name(self) -> &'static str {
        match self {
            AveragingKind::Classical => "classical",
            AveragingKind::Improved => "improved",
        }
    }
}

fn sub_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - s * y).collect()
}

/// `F̄(y) = ⟨e^{-Ωt} F(e^{Ωt}y, t)⟩`.
pub fn classical_field<L: LinearFlow>(sys: &OscillatorySystem<L>, plan: &SamplingPlan, y: &[f64]) -> Result<Vec<f64>> {
    check_len(sys.dim(), y.len())?;
    try_average(
        |t| {
            let x = sys.operator.flow(t, y)?;
            let f = sys.eval(&x, t)?;
            sys.operator.flow(-t, &f)
        },
        plan,
    )
}

/// Corrector average `C(z) = ⟨F(e^{Ωt}z, t)⟩`.
pub fn corrector<L: LinearFlow>(sys: &OscillatorySystem<L>, plan: &SamplingPlan, z: &[f64]) -> Result<Vec<f64>> {
    check_len(sys.dim(), z.len())?;
    try_average(
        |t| {
            let x = sys.operator.flow(t, z)?;
            sys.eval(&x, t)
        },
        plan,
    )
}

/// Corrector shift `P(z) = Ω̂⁻¹ C(z)`.
pub fn corrector_shift<L: LinearFlow>(sys: &OscillatorySystem<L>, plan: &SamplingPlan, z: &[f64]) -> Result<Vec<f64>> {
    let c = corrector(sys, plan, z)?;
    sys.operator.pinv_apply(&c)
}

/// `Ḡ(z) = ⟨e^{-Ωt}(F(e^{Ωt}z - εP(z), t) - ΩP(z))⟩`.
pub fn improved_field<L: LinearFlow>(sys: &OscillatorySystem<L>, plan: &SamplingPlan, z: &[f64]) -> Result<Vec<f64>> {
    let p = corrector_shift(sys, plan, z)?;
    let omega_p = sys.operator.apply(&p)?;
    try_average(
        |t| {
            let x = sub_scaled(&sys.operator.flow(t, z)?, sys.epsilon, &p);
            let f = sys.eval(&x, t)?;
            sys.operator.flow(-t, &sub_scaled(&f, 1.0, &omega_p))
        },
        plan,
    )
}

/// Averaged field of the given kind at `state`.
pub fn averaged_field<L: LinearFlow>(
    kind: AveragingKind,
    sys: &OscillatorySystem<L>,
    plan: &SamplingPlan,
    state: &[f64],
) -> Result<Vec<f64>> {
    match kind {
        AveragingKind::Classical => classical_field(sys, plan, state),
        AveragingKind::Improved => improved_field(sys, plan, state),
    }
}

/// Initial condition of the averaged variable: `x₀` (classical) or `x₀ + εP(x₀)` (improved).
pub fn lift_initial<L: LinearFlow>(
    kind: AveragingKind,
    sys: &OscillatorySystem<L>,
    plan: &SamplingPlan,
    x0: &[f64],
) -> Result<Vec<f64>> {
    check_len(sys.dim(), x0.len())?;
    match kind {
        AveragingKind::Classical => Ok(x0.to_vec()),
        AveragingKind::Improved => {
            let p = corrector_shift(sys, plan, x0)?;
            Ok(x0.iter().zip(&p).map(|(a, b)| a + sys.epsilon * b).collect())
        }
    }
}

/// Approximate solution at time `t` from the averaged state: `e^{Ωt}ȳ` (classical) or
/// `e^{Ωt}z̄ - εP(z̄)` (improved, with the plan re-centred at `t`).
pub fn reconstruct<L: LinearFlow>(
    kind: AveragingKind,
    sys: &OscillatorySystem<L>,
    plan: &SamplingPlan,
    t: f64,
    state: &[f64],
) -> Result<Vec<f64>> {
    let rotated = sys.operator.flow(t, state)?;
    match kind {
        AveragingKind::Classical => Ok(rotated),
        AveragingKind::Improved => {
            let p = corrector_shift(sys, &plan.with_origin(t), state)?;
            Ok(sub_scaled(&rotated, sys.epsilon, &p))
        }
    }
}

/// A system, a kind and a plan bundled as a right-hand side for the slow ODE
/// `z' = ε·field(z)`, with the averaging origin following the stage time.
pub struct AveragedField<L = SkewHermitianOperator> {
    pub kind: AveragingKind,
    pub system: Arc<OscillatorySystem<L>>,
    pub plan: SamplingPlan,
}

impl<L: LinearFlow> AveragedField<L> {
    pub fn new(kind: AveragingKind, system: Arc<OscillatorySystem<L>>, plan: SamplingPlan) -> Self {
        Self { kind, system, plan }
    }

    /// Field value without the `ε` factor.
    pub fn field(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        averaged_field(self.kind, &self.system, &self.plan.with_origin(t), state)
    }

    /// `ε·field`, the actual time derivative of the averaged variable.
    pub fn rate(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        let eps = self.system.epsilon;
        Ok(self.field(state, t)?.into_iter().map(|v| eps * v).collect())
    }

    pub fn lift(&self, x0: &[f64]) -> Result<Vec<f64>> {
        lift_initial(self.kind, &self.system, &self.plan, x0)
    }

    pub fn reconstruct(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        reconstruct(self.kind, &self.system, &self.plan, t, state)
    }
}

/// Orthogonal decomposition of the pulled-back fluctuations at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Report {
    /// `‖𝓕 - F̄‖` (time RMS).
    pub norm_f: f64,
    /// `‖𝓖 - Ḡ‖` (time RMS).
    pub norm_g: f64,
    /// `‖(𝓕 - F̄) - (𝓖 - Ḡ)‖`.
    pub norm_diff: f64,
    /// `⟨((𝓕 - F̄) - (𝓖 - Ḡ)) · (𝓖 - Ḡ)⟩`.
    pub cross: f64,
}

impl Theorem1Report {
    /// `|‖ΔF‖² - ‖ΔG‖² - ‖ΔF - ΔG‖²|`.
    pub fn pythagoras_defect(&self) -> f64 {
        (self.norm_f.powi(2) - self.norm_g.powi(2) - self.norm_diff.powi(2)).abs()
    }
}

/// Compares the classical integrand `𝓕(t) = e^{-Ωt}F(e^{Ωt}x, t)` with the shifted
/// integrand `𝓖(t) = e^{-Ωt}(F(e^{Ωt}x, t) - ΩP(x))`.
pub fn theorem1_diagnostic<L: LinearFlow>(
    sys: &OscillatorySystem<L>,
    plan: &SamplingPlan,
    x: &[f64],
) -> Result<Theorem1Report> {
    check_len(sys.dim(), x.len())?;
    let omega_p = sys.operator.apply(&corrector_shift(sys, plan, x)?)?;
    let weights = plan.weights()?;
    let mut fs = Vec::with_capacity(plan.samples);
    let mut gs = Vec::with_capacity(plan.samples);
    for t in plan.times() {
        let f = sys.eval(&sys.operator.flow(t, x)?, t)?;
        fs.push(sys.operator.flow(-t, &f)?);
        gs.push(sys.operator.flow(-t, &sub_scaled(&f, 1.0, &omega_p))?);
    }
    let mean = |vs: &[Vec<f64>]| {
        let mut m = vec![0.0; x.len()];
        for (v, w) in vs.iter().zip(&weights) {
            for (mi, vi) in m.iter_mut().zip(v) {
                *mi += w * vi;
            }
        }
        m
    };
    let f_bar = mean(&fs);
    let g_bar = mean(&gs);
    let (mut nf, mut ng, mut nd, mut cross) = (0.0, 0.0, 0.0, 0.0);
    for ((f, g), w) in fs.iter().zip(&gs).zip(&weights) {
        for i in 0..x.len() {
            let df = f[i] - f_bar[i];
            let dg = g[i] - g_bar[i];
            nf += w * df * df;
            ng += w * dg * dg;
            nd += w * (df - dg) * (df - dg);
            cross += w * (df - dg) * dg;
        }
    }
    Ok(Theorem1Report { norm_f: nf.sqrt(), norm_g: ng.sqrt(), norm_diff: nd.sqrt(), cross })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::DEFAULT_ZERO_TOLERANCE;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn constant_forcing() -> OscillatorySystem {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let op = SkewHermitianOperator::from_real(&m, DEFAULT_ZERO_TOLERANCE).unwrap();
        OscillatorySystem::new(op, 1e-3, |_, _| vec![1.0, 0.0])
    }

    #[test]
    fn constant_forcing_has_zero_averages() {
        let sys = constant_forcing();
        let plan = SamplingPlan::periodic(2.0 * PI, 8);
        let y = [0.4, -0.2];
        let c = classical_field(&sys, &plan, &y).unwrap();
        let g = improved_field(&sys, &plan, &y).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-15));
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn constant_forcing_corrector_shift() {
        let sys = constant_forcing();
        let plan = SamplingPlan::periodic(2.0 * PI, 8);
        let p = corrector_shift(&sys, &plan, &[0.0, 0.0]).unwrap();
        // Ω = [[0,1],[-1,0]] so Ω⁻¹(1,0) = (0,1).
        assert!((p[0]).abs() < 1e-15);
        assert!((p[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theorem1_on_constant_forcing() {
        let sys = constant_forcing();
        let plan = SamplingPlan::periodic(2.0 * PI, 16);
        let r = theorem1_diagnostic(&sys, &plan, &[1.0, 2.0]).unwrap();
        assert!(r.norm_g < 1e-14);
        assert!((r.norm_f - 1.0).abs() < 1e-14, "{r:?}");
    }

    #[test]
    fn wrong_state_length() {
        let sys = constant_forcing();
        let plan = SamplingPlan::periodic(2.0 * PI, 8);
        assert!(matches!(classical_field(&sys, &plan, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spot_check_flags_hidden_time_dependence() {
        let sys = constant_forcing();
        let hidden = OscillatorySystem::new(sys.operator.clone(), 1e-3, |_, t| vec![t.sin(), 0.0]);
        assert!(sys.spot_check(&[vec![1.0, 0.0]], &[0.5, 1.0]).is_ok());
        assert!(hidden.spot_check(&[vec![1.0, 0.0]], &[0.5, 1.0]).is_err());
    }
}
