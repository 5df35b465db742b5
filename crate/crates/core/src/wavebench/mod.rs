//! Advection-reaction benchmark `u_t = a u_x + b u_y + ε f(u, x, y)` on a doubly periodic
//! pseudospectral grid.
//!
//! The transport part is solved exactly by phase multipliers on the Fourier coefficients.
//! Wavenumbers at the Nyquist index are assigned zero frequency so that the flow maps
//! real fields to real fields.

mod grid;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::averaged::OscillatorySystem;
use crate::averaging::{try_average, SamplingPlan};
use crate::integrators::{axpy, drive, rk4, Trajectory};
use crate::linear::LinearFlow;
use crate::{Error, Result};

pub use grid::{AdvectionOperator, Grid2D, SpectralField, PDE_ZERO_TOLERANCE};

/// RK4 stability bound on the imaginary axis.
pub const RK4_IMAGINARY_BOUND: f64 = 2.8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvectionParams {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    /// Evaluate the reaction on a 3/2-padded grid.
    pub dealias: bool,
}

impl Default for AdvectionParams {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, epsilon: 0.01, dealias: false }
    }
}

/// `1 / (1 + ½cos(4πx/L₁)sin(2πy/L₂))`.
pub fn reaction_weight(l1: f64, l2: f64, x: f64, y: f64) -> f64 {
    1.0 / (1.0 + 0.5 * (4.0 * PI * x / l1).cos() * (2.0 * PI * y / l2).sin())
}

/// `f(u, x, y) = cos(u) / (1 + ½cos(4πx/L₁)sin(2πy/L₂))`.
pub fn reaction(l1: f64, l2: f64, u: f64, x: f64, y: f64) -> f64 {
    u.cos() * reaction_weight(l1, l2, x, y)
}

/// Reference initial condition `sin(sin(2πx/L₁) + 2πy/L₂)/4`.
pub fn reference_initial(grid: &Arc<Grid2D>) -> SpectralField {
    let (l1, l2) = (grid.l1, grid.l2);
    SpectralField::from_fn(grid.clone(), move |x, y| (((2.0 * PI * x / l1).sin()) + 2.0 * PI * y / l2).sin() / 4.0)
}

fn check_grid(grid: &Arc<Grid2D>, field: &SpectralField) -> Result<()> {
    if Arc::ptr_eq(grid, field.grid()) || **grid == **field.grid() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `(e^{Lt}v)(x, y) = v(x + at, y + bt)`.
pub fn advection_flow(params: &AdvectionParams, grid: &Arc<Grid2D>, field: &SpectralField, t: f64) -> Result<SpectralField> {
    check_grid(grid, field)?;
    let freqs = grid.frequencies(params.a, params.b);
    let coeffs = field.coefficients().iter().zip(&freqs).map(|(c, w)| c * Complex64::from_polar(1.0, w * t)).collect();
    SpectralField::from_coefficients(grid.clone(), coeffs)
}

/// `L̂⁻¹`: divides each coefficient by `iω_jk`, zeroing modes with `|ω_jk| ≤ zero_tol·max|ω|`.
pub fn l_pinv(params: &AdvectionParams, grid: &Arc<Grid2D>, field: &SpectralField, zero_tol: f64) -> Result<SpectralField> {
    check_grid(grid, field)?;
    let op = AdvectionOperator::new(grid.clone(), params.a, params.b, zero_tol);
    let coeffs = field
        .coefficients()
        .iter()
        .zip(op.frequencies().iter().zip(op.kernel_mask()))
        .map(|(c, (w, k))| if *k { Complex64::new(0.0, 0.0) } else { c / Complex64::new(0.0, *w) })
        .collect();
    SpectralField::from_coefficients(grid.clone(), coeffs)
}

/// Pointwise classical average `⟨f(w(x, y), x - at, y - bt)⟩`.
pub fn pde_classical_field(params: &AdvectionParams, grid: &Arc<Grid2D>, plan: &SamplingPlan, w: &SpectralField) -> Result<SpectralField> {
    check_grid(grid, w)?;
    let values = pde_classical_values(params, grid, plan, w.values())?;
    SpectralField::new(grid.clone(), values)
}

fn pde_classical_values(params: &AdvectionParams, grid: &Grid2D, plan: &SamplingPlan, w: &[f64]) -> Result<Vec<f64>> {
    let cosw: Vec<f64> = w.iter().map(|u| u.cos()).collect();
    let coef = classical_coefficient_values(params, grid, plan)?;
    Ok(cosw.iter().zip(&coef).map(|(c, k)| c * k).collect())
}

fn classical_coefficient_values(params: &AdvectionParams, grid: &Grid2D, plan: &SamplingPlan) -> Result<Vec<f64>> {
    let points: Vec<(f64, f64)> = grid.points().collect();
    try_average::<Error, _>(
        |t| Ok(points.iter().map(|&(x, y)| reaction_weight(grid.l1, grid.l2, x - params.a * t, y - params.b * t)).collect()),
        plan,
    )
}

/// Averaged coefficient `⟨1/(1 + ½cos(4π(x-t)/L₁)sin(2π(y-t)/L₂))⟩` on the grid.
pub fn classical_coefficient(params: &AdvectionParams, grid: &Arc<Grid2D>, plan: &SamplingPlan) -> Result<SpectralField> {
    SpectralField::new(grid.clone(), classical_coefficient_values(params, grid, plan)?)
}

/// Closed form of the averaged coefficient when `L₁ = 2L₂`:
/// `4/√(16(1 + ¼sin(2π(y-x)/L₂))² - 1)`.
pub fn classical_coefficient_double_period(l2: f64, x: f64, y: f64) -> f64 {
    let s = 1.0 + 0.25 * (2.0 * PI * (y - x) / l2).sin();
    4.0 / (16.0 * s * s - 1.0).sqrt()
}

/// Spatially constant averaged coefficient for incommensurate lengths: `4K(-1/3)/(√3π)`.
pub fn classical_coefficient_quasiperiodic() -> f64 {
    4.0 * elliptic_k(-1.0 / 3.0).expect("parameter below one") / (3f64.sqrt() * PI)
}

/// Complete elliptic integral of the first kind `K(m) = ∫₀^{π/2} (1 - m sin²θ)^{-1/2} dθ`.
pub fn elliptic_k(m: f64) -> Result<f64> {
    if !(m < 1.0) {
        return Err(Error::DomainError(format!("elliptic parameter must be below 1, got {m}")));
    }
    let (mut a, mut g) = (1.0f64, (1.0 - m).sqrt());
    for _ in 0..64 {
        if (a - g).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + g);
        g = (a * g).sqrt();
        a = next;
    }
    Ok(PI / (2.0 * a))
}

/// The PDE as an [`OscillatorySystem`] on flat grid values.
pub fn pde_system(params: &AdvectionParams, grid: &Arc<Grid2D>) -> Result<OscillatorySystem<AdvectionOperator>> {
    if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
        return Err(Error::NonPositiveParameter("epsilon"));
    }
    let op = AdvectionOperator::new(grid.clone(), params.a, params.b, PDE_ZERO_TOLERANCE);
    let nonlinearity = reaction_operator(grid, params.dealias)?;
    Ok(OscillatorySystem::new(op, params.epsilon, move |u: &[f64], _t: f64| nonlinearity(u)))
}

type Reaction = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

fn weights_on(grid: &Grid2D, l1: f64, l2: f64) -> Vec<f64> {
    grid.points().map(|(x, y)| reaction_weight(l1, l2, x, y)).collect()
}

fn reaction_operator(grid: &Arc<Grid2D>, dealias: bool) -> Result<Reaction> {
    if !dealias {
        let weights = weights_on(grid, grid.l1, grid.l2);
        return Ok(Box::new(move |u: &[f64]| u.iter().zip(&weights).map(|(v, w)| v.cos() * w).collect()));
    }
    let pad = |m: usize| (3 * m).div_ceil(4) * 2;
    let fine = Grid2D::new(grid.l1, grid.l2, pad(grid.m1), pad(grid.m2))?;
    let weights = weights_on(&fine, grid.l1, grid.l2);
    let coarse = grid.clone();
    Ok(Box::new(move |u: &[f64]| {
        let up = fine.inverse(&resample(&coarse, &fine, &coarse.forward(u)));
        let fu: Vec<f64> = up.iter().zip(&weights).map(|(v, w)| v.cos() * w).collect();
        coarse.inverse(&resample(&fine, &coarse, &fine.forward(&fu)))
    }))
}

/// Copies the coefficients shared by both grids, dropping Nyquist modes.
fn resample(from: &Grid2D, to: &Grid2D, coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); to.len()];
    let index = |j: i64, m: usize| if j < 0 { (j + m as i64) as usize } else { j as usize };
    let lim1 = (from.m1.min(to.m1) / 2) as i64;
    let lim2 = (from.m2.min(to.m2) / 2) as i64;
    for j in (1 - lim1)..lim1 {
        for k in (1 - lim2)..lim2 {
            out[index(j, to.m1) * to.m2 + index(k, to.m2)] = coeffs[index(j, from.m1) * from.m2 + index(k, from.m2)];
        }
    }
    out
}

/// Strang splitting: half transport, RK2 midpoint on `u_t = εf(u, x, y)`, half transport.
pub fn pde_exp_integrator(params: &AdvectionParams, grid: &Arc<Grid2D>, u0: &SpectralField, h: f64, t_end: f64, stride: usize) -> Result<Trajectory> {
    check_grid(grid, u0)?;
    let sys = pde_system(params, grid)?;
    let eps = params.epsilon;
    drive(u0.values(), h, t_end, stride, |_, h, u| {
        let half = sys.operator.flow(0.5 * h, u)?;
        let k1 = (sys.nonlinearity)(&half, 0.0);
        let mid = axpy(&half, 0.5 * h * eps, &k1);
        let k2 = (sys.nonlinearity)(&mid, 0.0);
        sys.operator.flow(0.5 * h, &axpy(&half, h * eps, &k2))
    })
}

/// RK4 on the semi-discrete system `u' = Lu + εf(u, x, y)`.
pub fn pde_benchmark(params: &AdvectionParams, grid: &Arc<Grid2D>, u0: &SpectralField, h: f64, t_end: f64, stride: usize) -> Result<Trajectory> {
    check_grid(grid, u0)?;
    let sys = pde_system(params, grid)?;
    let courant = h * sys.operator.max_frequency();
    if courant > RK4_IMAGINARY_BOUND {
        log::warn!("benchmark step h={h} gives h·max|ω| = {courant:.3} above the RK4 bound {RK4_IMAGINARY_BOUND}");
    }
    rk4(|u, t| sys.rhs(u, t), u0.values(), h, t_end, stride)
}

/// Integrating-factor RK4 in coefficient space; exact for the transport part.
pub fn pde_integrating_factor(params: &AdvectionParams, grid: &Arc<Grid2D>, u0: &SpectralField, h: f64, t_end: f64, stride: usize) -> Result<Trajectory> {
    check_grid(grid, u0)?;
    let sys = pde_system(params, grid)?;
    let eps = params.epsilon;
    let freqs = sys.operator.frequencies().to_vec();
    let nl = |c: &[Complex64]| -> Vec<Complex64> {
        let u = grid.inverse(c);
        grid.forward(&(sys.nonlinearity)(&u, 0.0)).into_iter().map(|z| z * eps).collect()
    };
    drive(u0.values(), h, t_end, stride, |_, h, u| {
        let e: Vec<Complex64> = freqs.iter().map(|w| Complex64::from_polar(1.0, 0.5 * w * h)).collect();
        let c = grid.forward(u);
        let a = nl(&c);
        let b = nl(&(0..c.len()).map(|i| e[i] * (c[i] + 0.5 * h * a[i])).collect::<Vec<_>>());
        let cc = nl(&(0..c.len()).map(|i| e[i] * c[i] + 0.5 * h * b[i]).collect::<Vec<_>>());
        let d = nl(&(0..c.len()).map(|i| e[i] * e[i] * c[i] + h * e[i] * cc[i]).collect::<Vec<_>>());
        let next: Vec<Complex64> = (0..c.len())
            .map(|i| e[i] * e[i] * c[i] + h / 6.0 * (e[i] * e[i] * a[i] + 2.0 * e[i] * (b[i] + cc[i]) + d[i]))
            .collect();
        Ok(grid.inverse(&next))
    })
}

/// The three reference configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdeCase {
    /// `L₁ = 2√3`, `L₂ = √3`.
    DoublePeriod,
    /// `L₁ = √2`, `L₂ = 2√2`.
    HalfPeriod,
    /// `L₁ = 2π`, `L₂ = 1`.
    Quasiperiodic,
}

impl PdeCase {
    pub const ALL: [PdeCase; 3] = [PdeCase::DoublePeriod, PdeCase::HalfPeriod, PdeCase::Quasiperiodic];

    pub fn name(self) -> &'static str {
        match self {
            PdeCase::DoublePeriod => "double",
            PdeCase::HalfPeriod => "half",
            PdeCase::Quasiperiodic => "quasi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn lengths(self) -> (f64, f64) {
        match self {
            PdeCase::DoublePeriod => (2.0 * 3f64.sqrt(), 3f64.sqrt()),
            PdeCase::HalfPeriod => (2f64.sqrt(), 2.0 * 2f64.sqrt()),
            PdeCase::Quasiperiodic => (2.0 * PI, 1.0),
        }
    }

    /// Common period of the transport flow, if any.
    pub fn period(self) -> Option<f64> {
        match self {
            PdeCase::DoublePeriod => Some(2.0 * 3f64.sqrt()),
            PdeCase::HalfPeriod => Some(2.0 * 2f64.sqrt()),
            PdeCase::Quasiperiodic => None,
        }
    }

    pub fn grid(self, m1: usize, m2: usize) -> Result<Arc<Grid2D>> {
        let (l1, l2) = self.lengths();
        Grid2D::new(l1, l2, m1, m2)
    }

    /// Trapezoid plan over the period, or a Birkhoff plan with step `birkhoff_step`.
    pub fn plan(self, samples: usize, birkhoff_step: f64) -> SamplingPlan {
        match self.period() {
            Some(p) => SamplingPlan::periodic(p, samples),
            None => SamplingPlan::birkhoff(birkhoff_step, samples),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn flow_shifts_function() {
        let grid = Grid2D::new(2.0, 3.0, 16, 12).unwrap();
        let p = AdvectionParams::default();
        let g = |x: f64, y: f64| (PI * x).sin() * (2.0 * PI * y / 3.0).cos() + 0.3;
        let f = SpectralField::from_fn(grid.clone(), g);
        let t = 0.37;
        let moved = advection_flow(&p, &grid, &f, t).unwrap();
        let exact = SpectralField::from_fn(grid.clone(), |x, y| g(x + t, y + t));
        assert!(max_diff(moved.values(), exact.values()) < 1e-12);
        let back = advection_flow(&p, &grid, &moved, -t).unwrap();
        assert!(max_diff(back.values(), f.values()) < 1e-13);
    }

    #[test]
    fn pinv_of_constant_is_zero() {
        let grid = Grid2D::new(2.0, 1.0, 8, 8).unwrap();
        let c = SpectralField::from_fn(grid.clone(), |_, _| 2.5);
        let z = l_pinv(&AdvectionParams::default(), &grid, &c, PDE_ZERO_TOLERANCE).unwrap();
        assert!(z.values().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn resonant_kernel_is_lattice_line() {
        let grid = Grid2D::new(2.0, 1.0, 10, 10).unwrap();
        let op = AdvectionOperator::new(grid.clone(), 1.0, 1.0, PDE_ZERO_TOLERANCE);
        for idx in 0..grid.len() {
            let (j, k) = grid.mode(idx);
            assert_eq!(op.kernel_mask()[idx], j + 2 * k == 0, "mode ({j},{k})");
        }
        let irr = Grid2D::new(2.0 * PI, 1.0, 10, 10).unwrap();
        let op = AdvectionOperator::new(irr.clone(), 1.0, 1.0, PDE_ZERO_TOLERANCE);
        for idx in 0..irr.len() {
            let (j, k) = irr.mode(idx);
            assert_eq!(op.kernel_mask()[idx], j == 0 && k == 0, "mode ({j},{k})");
        }
    }

    #[test]
    fn elliptic_values() {
        assert!((elliptic_k(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((elliptic_k(-1.0 / 3.0).unwrap() - 1.4599).abs() < 1e-4);
        assert!(elliptic_k(1.0).is_err());
        let m: f64 = 0.7;
        let n = 1_000_000;
        let h = PI / 2.0 / n as f64;
        let quad: f64 = (0..n).map(|i| {
            let th = (i as f64 + 0.5) * h;
            h / (1.0 - m * th.sin().powi(2)).sqrt()
        }).sum();
        assert!((quad - elliptic_k(m).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn double_period_coefficient_matches_closed_form() {
        let grid = PdeCase::DoublePeriod.grid(50, 20).unwrap();
        let plan = PdeCase::DoublePeriod.plan(64, 0.0);
        let coef = classical_coefficient(&AdvectionParams::default(), &grid, &plan).unwrap();
        let l2 = grid.l2;
        for ((x, y), v) in grid.points().zip(coef.values()) {
            assert!((v - classical_coefficient_double_period(l2, x, y)).abs() < 1e-10);
        }
    }

    #[test]
    fn quasiperiodic_coefficient_is_constant() {
        assert!((classical_coefficient_quasiperiodic() - 1.0732).abs() < 1e-4);
        let grid = PdeCase::Quasiperiodic.grid(10, 4).unwrap();
        let plan = PdeCase::Quasiperiodic.plan(1000, 0.17321);
        let coef = classical_coefficient(&AdvectionParams::default(), &grid, &plan).unwrap();
        for v in coef.values() {
            assert!((v - classical_coefficient_quasiperiodic()).abs() < 1e-4, "{v}");
        }
    }

    #[test]
    fn zero_epsilon_is_transport() {
        let grid = PdeCase::DoublePeriod.grid(16, 8).unwrap();
        let p = AdvectionParams { epsilon: 0.0, ..AdvectionParams::default() };
        let u0 = reference_initial(&grid);
        let traj = pde_exp_integrator(&p, &grid, &u0, 0.3, 1.5, 1).unwrap();
        let (t, last) = traj.last().unwrap();
        let exact = advection_flow(&p, &grid, &u0, t).unwrap();
        assert!(max_diff(last, exact.values()) < 1e-12);
    }

    #[test]
    fn dealiased_reaction_agrees_for_smooth_input() {
        let grid = PdeCase::DoublePeriod.grid(32, 16).unwrap();
        let plain = pde_system(&AdvectionParams::default(), &grid).unwrap();
        let padded = pde_system(&AdvectionParams { dealias: true, ..AdvectionParams::default() }, &grid).unwrap();
        let u = SpectralField::from_fn(grid.clone(), |x, _| 0.01 * (2.0 * PI * x / grid.l1).sin());
        let a = plain.eval(u.values(), 0.0).unwrap();
        let b = padded.eval(u.values(), 0.0).unwrap();
        assert!(max_diff(&a, &b) < 1e-2);
    }
}
