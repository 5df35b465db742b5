//! Capacitive parametric ultrasonic transducer: an RLC circuit whose capacitance is
//! modulated by a plate driven near twice the electrical resonance.
//!
//! Cartesian state `[V, U, y, z]` (voltage, its rate, plate displacement, its rate);
//! polar state `[ρ, φ, r, θ]` with phases measured in time units, so the averaged
//! fields are `π/ω`-periodic in both phases.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::averaging::{refine_until_stable, try_average, SamplingPlan};
use crate::integrators::rk4_final;
use crate::{Error, Result};

/// Nondimensional device parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CputParams {
    pub epsilon: f64,
    pub gap: f64,
    pub omega: f64,
    pub forcing: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Relative frequency detuning `Δ` of the drive.
    pub detuning: f64,
}

impl CputParams {
    /// The reference device.
    pub fn reference() -> Self {
        Self {
            epsilon: 0.069908094621482,
            gap: 12.0,
            omega: 0.628318530717959,
            forcing: 4.517732098486560,
            alpha: 0.471019510657106,
            beta: 3.388299073864920,
            gamma: 0.208520337367901,
            detuning: 0.0,
        }
    }

    pub fn with_forcing(mut self, forcing: f64) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("epsilon", self.epsilon),
            ("D", self.gap),
            ("omega", self.omega),
            ("F", self.forcing),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveParameter(name));
            }
        }
        if !self.detuning.is_finite() {
            return Err(Error::DomainError("non-finite detuning".into()));
        }
        Ok(())
    }

    /// Mean displacement `ερ²/(2D²(2ω)²)` induced by a voltage amplitude `ρ`.
    pub fn mean_shift(&self, rho: f64) -> f64 {
        self.epsilon * rho * rho / (2.0 * self.gap.powi(2) * (2.0 * self.omega).powi(2))
    }
}

/// Device constants in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalCput {
    pub resistance: f64,
    pub inductance: f64,
    pub area: f64,
    pub permittivity: f64,
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub drive: f64,
    pub gap: f64,
    pub frequency: f64,
}

/// Rescales time by `c` and displacement by `μ`.
pub fn nondimensionalize(phys: &PhysicalCput, c: f64, mu: f64) -> Result<CputParams> {
    let checks = [
        ("R", phys.resistance),
        ("L", phys.inductance),
        ("A", phys.area),
        ("eps0", phys.permittivity),
        ("m", phys.mass),
        ("b", phys.damping),
        ("k", phys.stiffness),
        ("F0", phys.drive),
        ("d", phys.gap),
        ("omega0", phys.frequency),
        ("c", c),
        ("mu", mu),
    ];
    for (name, v) in checks {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositiveParameter(name));
        }
    }
    let eps = mu.powi(3) * phys.permittivity * phys.area / (2.0 * phys.mass * c * c);
    Ok(CputParams {
        epsilon: eps,
        gamma: phys.resistance / (phys.inductance * c * eps),
        alpha: 1.0 / (phys.inductance * phys.area * phys.permittivity * c * c * mu * eps),
        beta: phys.damping / (phys.mass * c * eps),
        forcing: mu * phys.drive / (phys.mass * c * c * eps),
        gap: mu * phys.gap,
        omega: phys.frequency / c,
        detuning: 0.0,
    })
}

/// `[V, U, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CputCartesianState {
    pub v: f64,
    pub u: f64,
    pub y: f64,
    pub z: f64,
}

impl CputCartesianState {
    pub fn to_array(self) -> [f64; 4] {
        [self.v, self.u, self.y, self.z]
    }

    pub fn from_slice(s: &[f64]) -> Result<Self> {
        if s.len() != 4 {
            return Err(Error::WrongDimension { expected: 4, found: s.len() });
        }
        Ok(Self { v: s[0], u: s[1], y: s[2], z: s[3] })
    }
}

/// `[ρ, φ, r, θ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CputPolarState {
    pub rho: f64,
    pub phi: f64,
    pub r: f64,
    pub theta: f64,
}

impl CputPolarState {
    pub fn new(rho: f64, phi: f64, r: f64, theta: f64) -> Self {
        Self { rho, phi, r, theta }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.phi, self.r, self.theta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { rho: a[0], phi: a[1], r: a[2], theta: a[3] }
    }
}

/// The sink of the averaged system for [`CputParams::reference`].
pub const REFERENCE_SINK: [f64; 4] = [24.442613175475309, 1.077007670858842, 0.585849324582913, -2.419228080303699];

/// Treatment of the electrostatic term `εV²/(D - y)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Electrostatic {
    Full,
    /// First-order Taylor expansion `ε(V²/D² + 2V²y/D³)`.
    Taylor,
}

fn electrostatic(p: &CputParams, v: f64, y: f64, kind: Electrostatic) -> f64 {
    match kind {
        Electrostatic::Full => v * v / (p.gap - y).powi(2),
        Electrostatic::Taylor => v * v * (1.0 / p.gap.powi(2) + 2.0 * y / p.gap.powi(3)),
    }
}

/// Right-hand side of the four first-order equations with the chosen electrostatic term.
/// The drive is `F sin(2(1+εΔ)ωt)`.
pub fn cartesian_field_with(p: &CputParams, s: &[f64; 4], t: f64, kind: Electrostatic) -> Result<[f64; 4]> {
    let [v, u, y, z] = *s;
    if kind == Electrostatic::Full && y >= p.gap {
        return Err(Error::PlateContact { y, gap: p.gap });
    }
    let eps = p.epsilon;
    let w = p.omega;
    let drive = (2.0 * (1.0 + eps * p.detuning) * w * t).sin();
    Ok([
        u,
        -w * w * v - eps * p.gamma * u + eps * p.alpha * y * v,
        z,
        -(2.0 * w).powi(2) * y - eps * p.beta * z + eps * p.forcing * drive + eps * electrostatic(p, v, y, kind),
    ])
}

/// Right-hand side with the full electrostatic nonlinearity.
pub fn cartesian_field(p: &CputParams, s: &CputCartesianState, t: f64) -> Result<[f64; 4]> {
    cartesian_field_with(p, &s.to_array(), t, Electrostatic::Full)
}

/// Polar to Cartesian at time `t`; `improved` adds the mean displacement shift.
pub fn polar_to_cartesian(p: &CputParams, s: &CputPolarState, t: f64, improved: bool) -> CputCartesianState {
    let w = p.omega;
    let a = w * (t + s.phi);
    let b = 2.0 * w * (t + s.theta);
    let shift = if improved { p.mean_shift(s.rho) } else { 0.0 };
    CputCartesianState {
        v: s.rho * a.cos(),
        u: -w * s.rho * a.sin(),
        y: s.r * b.cos() + shift,
        z: -2.0 * w * s.r * b.sin(),
    }
}

/// Instantaneous polar rates before averaging (Taylor-truncated nonlinearity, the
/// `O(ε²)` `ρρ̇` terms dropped).
pub fn polar_integrand(p: &CputParams, s: &CputPolarState, t: f64, improved: bool) -> Result<[f64; 4]> {
    if s.r <= 0.0 {
        return Err(Error::RadiusZero);
    }
    let c = polar_to_cartesian(p, s, t, improved);
    let [dv, du, dy, dz] = cartesian_field_with(p, &c.to_array(), t, Electrostatic::Taylor)?;
    let w2 = p.omega * p.omega;
    let k2 = 4.0 * w2;
    let shift = if improved { p.mean_shift(s.rho) } else { 0.0 };
    let yc = c.y - shift;
    Ok([
        (w2 * c.v * dv + c.u * du) / (w2 * s.rho),
        (dv * c.u - du * c.v) / (w2 * s.rho * s.rho) - 1.0,
        (k2 * yc * dy + c.z * dz) / (k2 * s.r),
        (dy * c.z - dz * yc) / (k2 * s.r * s.r) - 1.0,
    ])
}

/// Numerical average of [`polar_integrand`] with a given plan.
pub fn numerical_polar_field(p: &CputParams, s: &CputPolarState, improved: bool, plan: &SamplingPlan) -> Result<[f64; 4]> {
    let v = try_average(|t| polar_integrand(p, s, t, improved).map(|r| r.to_vec()), plan)?;
    Ok([v[0], v[1], v[2], v[3]])
}

/// Numerical average over one period `2π/ω`, doubling samples until stable.
pub fn numerical_polar_field_refined(p: &CputParams, s: &CputPolarState, improved: bool, rel_tol: f64) -> Result<[f64; 4]> {
    let plan = SamplingPlan::periodic(2.0 * std::f64::consts::PI / p.omega, 8);
    let (v, _) = refine_until_stable(|t| polar_integrand(p, s, t, improved).map(|r| r.to_vec()), plan, rel_tol, 1 << 16)?;
    Ok([v[0], v[1], v[2], v[3]])
}

fn averaged_rates(p: &CputParams, s: &[f64; 4], detuning: f64) -> [f64; 4] {
    let [rho, phi, r, theta] = *s;
    let (eps, d, w) = (p.epsilon, p.gap, p.omega);
    let (sd, cd) = (2.0 * (theta - phi) * w).sin_cos();
    let (st, ct) = (2.0 * theta * w).sin_cos();
    let rho2 = rho * rho;
    let k = rho2 * (eps * rho2 + 4.0 * d.powi(3) * w * w);
    [
        eps / (4.0 * w) * rho * (-2.0 * p.gamma * w + r * p.alpha * sd),
        -eps / (16.0 * d * d * w.powi(4))
            * (eps * p.alpha * rho2 + 16.0 * d * d * w.powi(4) * detuning + 4.0 * d * d * p.alpha * r * w * w * cd),
        -eps / (32.0 * d.powi(5) * w.powi(3)) * (8.0 * d.powi(5) * w * w * (2.0 * r * p.beta * w + p.forcing * ct) + k * sd),
        -eps / (64.0 * d.powi(5) * w.powi(4)) / r
            * (k * cd + 8.0 * d * d * w * w * (r * (rho2 + 8.0 * d.powi(3) * w * w * detuning) - d.powi(3) * p.forcing * st)),
    ]
}

fn resonant_rates(p: &CputParams, x: &[f64; 4]) -> [f64; 4] {
    let [rho, phi, r, theta] = *x;
    let eps = p.epsilon;
    let (d, w) = (p.gap, p.omega);
    let (sd, cd) = (2.0 * (theta - phi) * w).sin_cos();
    let (st, ct) = (2.0 * theta * w).sin_cos();
    let rho2 = rho * rho;
    let k = rho2 * (eps * rho2 + 4.0 * d.powi(3) * w * w);
    [
        eps / (4.0 * w) * rho * (-2.0 * p.gamma * w + r * p.alpha * sd),
        -(eps * p.alpha) / (16.0 * d * d * w.powi(4)) * (eps * rho2 + 4.0 * d * d * r * w * w * cd),
        -eps / (32.0 * d.powi(5) * w.powi(3)) * (8.0 * d.powi(5) * w * w * (2.0 * r * p.beta * w + p.forcing * ct) + k * sd),
        -eps / (64.0 * d.powi(5) * w.powi(4)) / r * (k * cd + 8.0 * d * d * w * w * (r * rho2 - d.powi(3) * p.forcing * st)),
    ]
}

/// Closed-form averaged polar field at exact resonance.
pub fn averaged_field(p: &CputParams, s: &CputPolarState) -> Result<[f64; 4]> {
    if s.r <= 0.0 {
        return Err(Error::RadiusZero);
    }
    Ok(resonant_rates(p, &s.to_array()))
}

/// Closed-form averaged polar field with drive detuning `p.detuning`, in the stretched time
/// `τ = (1 + εΔ)t`.
pub fn detuned_averaged_field(p: &CputParams, s: &CputPolarState) -> Result<[f64; 4]> {
    if s.r <= 0.0 {
        return Err(Error::RadiusZero);
    }
    Ok(averaged_rates(p, &s.to_array(), p.detuning))
}

/// Coefficients `A₀..A₄` of the quartic in `σ = ρ²` satisfied by the fixed points.
pub fn quartic_coeffs(p: &CputParams) -> [f64; 5] {
    let (a, b, g, d, w, e, f) = (p.alpha, p.beta, p.gamma, p.gap, p.omega, p.epsilon, p.forcing);
    [
        1024.0 * b * b * g * g * d.powi(10) * w.powi(8) - 64.0 * a * a * d.powi(10) * f * f * w.powi(4),
        256.0 * a * b * g * d.powi(8) * w.powi(6),
        16.0 * a * a * b * b * d.powi(6) * w * w * e * e
            + 16.0 * a * a * d.powi(6) * w.powi(4)
            + 64.0 * a * b * g * d.powi(5) * w.powi(4) * e
            + 256.0 * g * g * d.powi(4) * w.powi(6),
        -8.0 * a * a * d.powi(3) * w * w * e,
        a * a * e * e,
    ]
}

/// `B₀..B₄` with `B₃ = A₃/ε`, `B₄ = A₄/ε²`.
pub fn b_coeffs(p: &CputParams) -> [f64; 5] {
    let a = quartic_coeffs(p);
    [a[0], a[1], a[2], a[3] / p.epsilon, a[4] / (p.epsilon * p.epsilon)]
}

/// Discriminant `B₃² - 4B₂B₄` of the singular-branch quadratic.
pub fn singular_discriminant(p: &CputParams) -> f64 {
    let b = b_coeffs(p);
    b[3] * b[3] - 4.0 * b[2] * b[4]
}

/// Fixed point from the regular-branch quadratic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbativeFixedPoint {
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
    pub y_mean: f64,
    /// Leading-order simplification of `σ`.
    pub leading_order_sigma: f64,
    /// Radicand `N_rad` under the square root.
    pub radicand: f64,
}

impl PerturbativeFixedPoint {
    /// Phases consistent with `(σ, r)` from the fixed-point relations, reduced to `(-π/(2ω), π/(2ω)]`.
    pub fn polar_guess(&self, p: &CputParams) -> CputPolarState {
        let (d, w, e) = (p.gap, p.omega, p.epsilon);
        let sm = 2.0 * p.gamma * w / (self.r * p.alpha);
        let cm = -e * self.sigma / (4.0 * d * d * w * w * self.r);
        let k = 4.0 * d.powi(3) * self.sigma * w * w + self.sigma * self.sigma * e;
        let st = (k * cm + 8.0 * d * d * self.r * self.sigma * w * w) / (8.0 * d.powi(5) * p.forcing * w * w);
        let ct = (-k * sm - 16.0 * p.beta * d.powi(5) * self.r * w.powi(3)) / (8.0 * d.powi(5) * p.forcing * w * w);
        let theta = st.atan2(ct) / (2.0 * w);
        let phi = reduce_phase(theta - sm.atan2(cm) / (2.0 * w), w);
        CputPolarState { rho: self.rho, phi, r: self.r, theta }
    }
}

/// Reduces a phase to `(-π/(2ω), π/(2ω)]`.
pub fn reduce_phase(x: f64, omega: f64) -> f64 {
    let period = std::f64::consts::PI / omega;
    let mut y = x.rem_euclid(period);
    if y > 0.5 * period {
        y -= period;
    }
    y
}

pub fn perturbative_fixed_point(p: &CputParams) -> Result<PerturbativeFixedPoint> {
    p.validate()?;
    let (a, b, g, d, w, e, f) = (p.alpha, p.beta, p.gamma, p.gap, p.omega, p.epsilon, p.forcing);
    let n_rad = d * d * f * f * a.powi(4) * w * w + 16.0 * f * f * a * a * g * g * w.powi(4)
        - 256.0 * b * b * g.powi(4) * w.powi(8)
        + 4.0 * a * b * g * d * w * w * (a * a * f * f - 16.0 * b * b * g * g * w.powi(4)) * e
        + (d * d * f * f * a.powi(4) * b * b - 16.0 * d * d * a * a * b.powi(4) * g * g * w.powi(4)) * e * e;
    if n_rad < 0.0 {
        return Err(Error::NoRealSolution(format!("radicand {n_rad:.6e} is negative")));
    }
    let sigma = (-8.0 * d.powi(4) * a * b * g * w.powi(4) + 2.0 * d.powi(3) * w * n_rad.sqrt())
        / (d * d * a * a * w * w + 16.0 * g * g * w.powi(4) + 4.0 * a * b * g * d * w * w * e + a * a * d * d * b * b * e * e);
    if sigma < 0.0 {
        return Err(Error::NoRealSolution(format!("sigma {sigma:.6e} is negative")));
    }
    let lo_rad = d * d * f * f * a.powi(4) + 16.0 * f * f * a * a * g * g * w * w - 256.0 * b * b * g.powi(4) * w.powi(6);
    let leading_order_sigma = (-8.0 * d.powi(4) * a * b * g * w * w + 2.0 * d.powi(3) * lo_rad.max(0.0).sqrt())
        / (d * d * a * a + 16.0 * g * g * w * w);
    let r = ((2.0 * g * w / a).powi(2) + (e * sigma / (4.0 * d * d * w * w)).powi(2)).sqrt();
    Ok(PerturbativeFixedPoint {
        sigma,
        rho: sigma.sqrt(),
        r,
        y_mean: e * sigma / (8.0 * d * d * w * w),
        leading_order_sigma,
        radicand: n_rad,
    })
}

/// Result of a Newton solve on a 4-dimensional field.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericFixedPoint {
    pub state: CputPolarState,
    pub jacobian_eigenvalues: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

impl NumericFixedPoint {
    pub fn is_sink(&self) -> bool {
        self.jacobian_eigenvalues.iter().all(|z| z.re < 0.0)
    }
}

fn norm4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_jacobian<F>(field: &F, x: &[f64; 4]) -> Result<Matrix4<f64>>
where
    F: Fn(&[f64; 4]) -> Result<[f64; 4]>,
{
    let mut j = Matrix4::zeros();
    for k in 0..4 {
        let h = 1e-6 * (1.0 + x[k].abs());
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        let fp = field(&xp)?;
        let fm = field(&xm)?;
        for i in 0..4 {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Damped Newton iteration for `field(x) = 0`, central-difference Jacobian.
pub fn newton_fixed_point<F>(field: F, guess: [f64; 4], tol: f64, max_iter: usize) -> Result<NumericFixedPoint>
where
    F: Fn(&[f64; 4]) -> Result<[f64; 4]>,
{
    let mut x = guess;
    let mut f = field(&x)?;
    let mut res = norm4(&f);
    let mut iterations = 0;
    while res > tol {
        if iterations == max_iter {
            return Err(Error::NoConvergence { residual: res, iterations });
        }
        iterations += 1;
        let j = fd_jacobian(&field, &x)?;
        let delta = j.lu().solve(&-Vector4::from(f)).ok_or(Error::SingularJacobian)?;
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let mut trial = x;
            for i in 0..4 {
                trial[i] += lambda * delta[i];
            }
            if let Ok(ft) = field(&trial) {
                let rt = norm4(&ft);
                if rt < res {
                    x = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { residual: res, iterations });
        }
    }
    let j = fd_jacobian(&field, &x)?;
    Ok(NumericFixedPoint {
        state: CputPolarState::from_array(x),
        jacobian_eigenvalues: j.complex_eigenvalues().iter().copied().collect(),
        residual: res,
        iterations,
    })
}

/// Newton root of [`averaged_field`] from `guess`.
pub fn fixed_point_numeric(p: &CputParams, guess: &CputPolarState) -> Result<NumericFixedPoint> {
    p.validate()?;
    if guess.r <= 0.0 || guess.rho <= 0.0 {
        return Err(Error::DomainError("guess needs positive ρ and r".into()));
    }
    newton_fixed_point(|x| averaged_field(p, &CputPolarState::from_array(*x)), guess.to_array(), 1e-12, 100)
}

/// Minimum drive amplitude for a nontrivial steady state at detuning `Δ`.
pub fn excitation_threshold(p: &CputParams, detuning: f64) -> f64 {
    let w = p.omega;
    4.0 * w * w / p.alpha
        * (p.gamma * p.gamma + 4.0 * detuning * detuning * w * w).sqrt()
        * (p.beta * p.beta + 16.0 * detuning * detuning * w * w).sqrt()
}

/// Leading-order steady-state `ρ²` under detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetunedAmplitude {
    /// `ρ²`, clamped at zero.
    pub rho2: f64,
    /// Unclamped value of the closed form.
    pub raw: f64,
    pub below_threshold: bool,
}

pub fn rho2_detuned(p: &CputParams, detuning: f64) -> DetunedAmplitude {
    let (a, b, g, d, w, f) = (p.alpha, p.beta, p.gamma, p.gap, p.omega, p.forcing);
    let dl = detuning;
    let m = a * d * dl * (b + 2.0 * g) - 2.0 * b * g * g;
    let zeta = -4096.0 * b * b * dl.powi(4) * w.powi(10) + 1024.0 * b * dl * dl * w.powi(8) * m - 64.0 * w.powi(6) * m * m
        + 64.0 * a * a * dl * dl * f * f * w.powi(4)
        + 16.0 * a * a * f * f * w * w * (g * g - a * d * dl)
        + a.powi(4) * d * d * f * f;
    let c1 = -4.0 * a * b * g * d * w * w + 32.0 * dl * w.powi(4) * (dl * (a * d - 8.0 * dl * w * w) - 2.0 * g * g);
    let denom = 16.0 * g * g * w * w + (a * d - 8.0 * dl * w * w).powi(2);
    let raw = 2.0 * d.powi(3) * (zeta.max(0.0).sqrt() + c1) / denom;
    let below = zeta < 0.0 || raw < 0.0;
    DetunedAmplitude { rho2: raw.max(0.0), raw, below_threshold: below }
}

/// One axis of a regular grid: `start + i·step`, `i < count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, step: f64, count: usize) -> Self {
        Self { start, step, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }
}

/// Initial-condition grid over `(r, ρ, φ, θ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasinGrid {
    pub r: Axis,
    pub rho: Axis,
    pub phi: Axis,
    pub theta: Axis,
}

impl BasinGrid {
    /// `[0.01:0.01:2]×[0.1:0.1:35]×[0:0.2:2π)²`, 71,680,000 points.
    pub fn full() -> Self {
        Self {
            r: Axis::new(0.01, 0.01, 200),
            rho: Axis::new(0.1, 0.1, 350),
            phi: Axis::new(0.0, 0.2, 32),
            theta: Axis::new(0.0, 0.2, 32),
        }
    }

    /// Same ranges, coarsened to 10⁴ points.
    pub fn desk() -> Self {
        Self {
            r: Axis::new(0.01, 0.2, 10),
            rho: Axis::new(0.1, 3.5, 10),
            phi: Axis::new(0.0, 0.6, 10),
            theta: Axis::new(0.0, 0.6, 10),
        }
    }

    pub fn len(&self) -> usize {
        self.r.count * self.rho.count * self.phi.count * self.theta.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `i`-th grid point as a polar state.
    pub fn point(&self, i: usize) -> CputPolarState {
        let it = i % self.theta.count;
        let rest = i / self.theta.count;
        let ip = rest % self.phi.count;
        let rest = rest / self.phi.count;
        let irho = rest % self.rho.count;
        let ir = rest / self.rho.count;
        CputPolarState {
            rho: self.rho.value(irho),
            phi: self.phi.value(ip),
            r: self.r.value(ir),
            theta: self.theta.value(it),
        }
    }
}

/// Time variable in which the averaged system is integrated during a basin scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasinClock {
    /// Original time `t`: the closed-form field as is.
    Physical,
    /// Slow time `εt`: the closed-form field divided by `ε`.
    Slow,
}

/// Outcome of a basin scan.
#[derive(Clone, Debug, PartialEq)]
pub struct BasinSummary {
    pub count: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub max_distance: f64,
    pub worst_point: Option<CputPolarState>,
}

/// Representative with non-negative amplitudes: `(-ρ, φ) ~ (ρ, φ + π/ω)` and
/// `(-r, θ) ~ (r, θ + π/(2ω))`.
pub fn canonical_polar(p: &CputParams, s: &[f64; 4]) -> [f64; 4] {
    let [mut rho, mut phi, mut r, mut theta] = *s;
    let half = std::f64::consts::PI / p.omega;
    if rho < 0.0 {
        rho = -rho;
        phi += half;
    }
    if r < 0.0 {
        r = -r;
        theta += 0.5 * half;
    }
    [rho, phi, r, theta]
}

/// Distance between polar states after [`canonical_polar`], with phase differences
/// reduced modulo `π/ω`.
pub fn polar_distance(p: &CputParams, a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let (a, b) = (canonical_polar(p, a), canonical_polar(p, b));
    let d = [
        a[0] - b[0],
        reduce_phase(a[1] - b[1], p.omega),
        a[2] - b[2],
        reduce_phase(a[3] - b[3], p.omega),
    ];
    norm4(&d)
}

/// Integrates the averaged system with RK4 from every grid point and records the field
/// norm and the distance to `sink` at the final time.
pub fn basin_scan(
    p: &CputParams,
    grid: &BasinGrid,
    h: f64,
    t_end: f64,
    clock: BasinClock,
    sink: &CputPolarState,
) -> Result<BasinSummary> {
    p.validate()?;
    if grid.is_empty() {
        return Err(Error::DomainError("empty basin grid".into()));
    }
    if grid.r.start <= 0.0 {
        return Err(Error::DomainError("r-range must exclude 0".into()));
    }
    let scale = match clock {
        BasinClock::Physical => 1.0,
        BasinClock::Slow => 1.0 / p.epsilon,
    };
    let sink = sink.to_array();
    let outcomes: Vec<Option<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x0 = grid.point(i).to_array();
            let end = rk4_final(
                |x: &[f64; 4], _| {
                    let f = resonant_rates(p, x);
                    Ok([scale * f[0], scale * f[1], scale * f[2], scale * f[3]])
                },
                x0,
                h,
                t_end,
            )
            .ok()?;
            let residual = norm4(&resonant_rates(p, &end));
            residual.is_finite().then(|| (residual, polar_distance(p, &end, &sink)))
        })
        .collect();
    let mut summary = BasinSummary { count: grid.len(), failures: 0, max_residual: 0.0, max_distance: 0.0, worst_point: None };
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            None => summary.failures += 1,
            Some((res, dist)) => {
                summary.max_residual = summary.max_residual.max(*res);
                if *dist > summary.max_distance || summary.worst_point.is_none() {
                    summary.max_distance = summary.max_distance.max(*dist);
                    summary.worst_point = Some(grid.point(i));
                }
            }
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn origin_is_unforced_at_zero() {
        let p = CputParams::reference();
        let s = CputCartesianState { v: 0.0, u: 0.0, y: 0.0, z: 0.0 };
        assert_eq!(cartesian_field(&p, &s, 0.0).unwrap(), [0.0; 4]);
        let f = cartesian_field(&p, &s, std::f64::consts::PI / (4.0 * p.omega)).unwrap();
        assert_relative_eq!(f[3], p.epsilon * p.forcing, max_relative = 1e-15);
    }

    #[test]
    fn electrostatic_term_at_unit_voltage() {
        let p = CputParams::reference();
        let s = CputCartesianState { v: 1.0, u: 0.0, y: 0.0, z: 0.0 };
        let f = cartesian_field(&p, &s, 0.0).unwrap();
        assert_relative_eq!(f[3], p.epsilon / 144.0, max_relative = 1e-15);
    }

    #[test]
    fn plate_contact() {
        let p = CputParams::reference();
        let s = CputCartesianState { v: 1.0, u: 0.0, y: 12.0, z: 0.0 };
        assert!(matches!(cartesian_field(&p, &s, 0.0), Err(Error::PlateContact { .. })));
    }

    #[test]
    fn mean_shift_identity() {
        let p = CputParams::reference();
        let s = CputPolarState::new(24.3626, 0.3, 0.5, 0.1);
        let a = polar_to_cartesian(&p, &s, 1.7, true);
        let b = polar_to_cartesian(&p, &s, 1.7, false);
        let expected = p.epsilon * s.rho * s.rho / (8.0 * 144.0 * p.omega * p.omega);
        assert_relative_eq!(a.y - b.y, expected, max_relative = 1e-12);
        assert_relative_eq!(expected, 0.091235, max_relative = 1e-4);
    }

    #[test]
    fn zero_amplitudes_map_to_origin() {
        let p = CputParams::reference();
        let c = polar_to_cartesian(&p, &CputPolarState::new(0.0, 1.0, 0.0, 2.0), 3.0, true);
        assert_eq!(c.to_array(), [0.0, -0.0, 0.0, -0.0]);
    }

    #[test]
    fn zero_radius_rejected() {
        let p = CputParams::reference();
        let s = CputPolarState::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(averaged_field(&p, &s), Err(Error::RadiusZero)));
    }

    #[test]
    fn zero_rho_is_invariant() {
        let p = CputParams::reference();
        let f = averaged_field(&p, &CputPolarState::new(0.0, 0.4, 0.7, 1.1)).unwrap();
        assert_eq!(f[0], 0.0);
    }

    #[test]
    fn reference_sink_residual() {
        let p = CputParams::reference();
        let f = averaged_field(&p, &CputPolarState::from_array(REFERENCE_SINK)).unwrap();
        assert!(norm4(&f) <= 1e-10);
    }

    #[test]
    fn detuning_extra_terms() {
        let p = CputParams::reference();
        let s = CputPolarState::new(20.0, 0.5, 0.6, -1.0);
        let f0 = averaged_field(&p, &s).unwrap();
        let f1 = detuned_averaged_field(&p.with_detuning(0.3), &s).unwrap();
        assert_relative_eq!(f1[1] - f0[1], -p.epsilon * 0.3, max_relative = 1e-10);
        assert_relative_eq!(f1[3] - f0[3], -p.epsilon * 0.3, max_relative = 1e-10);
        let fz = detuned_averaged_field(&p, &s).unwrap();
        for i in 0..4 {
            assert_relative_eq!(fz[i], f0[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn quartic_scaling() {
        let p = CputParams::reference();
        let a = quartic_coeffs(&p);
        let b = b_coeffs(&p);
        assert_eq!(a[4], p.alpha * p.alpha * p.epsilon * p.epsilon);
        assert_relative_eq!(b[3] * p.epsilon, a[3], max_relative = 1e-15);
        assert_relative_eq!(b[4] * p.epsilon * p.epsilon, a[4], max_relative = 1e-15);
    }

    #[test]
    fn singular_branch_is_complex() {
        let p = CputParams::reference();
        let (a, b, g, d, w, e) = (p.alpha, p.beta, p.gamma, p.gap, p.omega, p.epsilon);
        let closed = -64.0 * d.powi(4) * a * a * w * w * ((d * a * b * e + 2.0 * g * w * w).powi(2) + 12.0 * g * g * w.powi(4));
        let disc = singular_discriminant(&p);
        assert!(disc < 0.0);
        assert_relative_eq!(disc, closed, max_relative = 1e-10);
    }

    #[test]
    fn perturbative_matches_prediction_b() {
        let p = CputParams::reference();
        let fp = perturbative_fixed_point(&p).unwrap();
        assert_relative_eq!(fp.rho, 24.3626, max_relative = 1e-5);
        assert_relative_eq!(fp.r, 0.58547, max_relative = 1e-5);
        assert_relative_eq!(fp.y_mean, 0.091235, max_relative = 1e-5);
        assert!((fp.sigma - fp.leading_order_sigma).abs() / fp.sigma < 0.05);
    }

    #[test]
    fn below_threshold_has_no_solution() {
        let p = CputParams::reference().with_forcing(1.0);
        assert!(matches!(perturbative_fixed_point(&p), Err(Error::NoRealSolution(_))));
    }

    #[test]
    fn newton_reaches_reference_sink() {
        let p = CputParams::reference();
        let guess = perturbative_fixed_point(&p).unwrap().polar_guess(&p);
        let fp = fixed_point_numeric(&p, &guess).unwrap();
        for (a, b) in fp.state.to_array().iter().zip(REFERENCE_SINK) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(fp.residual <= 1e-12);
        assert!(fp.is_sink());
    }

    #[test]
    fn threshold_at_resonance() {
        let p = CputParams::reference();
        let f = excitation_threshold(&p, 0.0);
        assert_relative_eq!(f, 4.0 * p.omega.powi(2) * p.gamma * p.beta / p.alpha, max_relative = 1e-15);
        assert!((f - 2.3686).abs() < 1e-3);
        assert!(excitation_threshold(&p, 0.1) > f);
        assert!(excitation_threshold(&p, -0.2) > excitation_threshold(&p, -0.1));
    }

    #[test]
    fn detuned_rho2_at_resonance_is_leading_order() {
        let p = CputParams::reference();
        let lo = perturbative_fixed_point(&p).unwrap().leading_order_sigma;
        assert_relative_eq!(rho2_detuned(&p, 0.0).rho2, lo, max_relative = 1e-12);
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(BasinGrid::full().len(), 71_680_000);
        assert_eq!(BasinGrid::desk().len(), 10_000);
        let g = BasinGrid::desk();
        let last = g.point(g.len() - 1);
        assert_relative_eq!(last.r, 1.81, max_relative = 1e-12);
        assert_relative_eq!(last.theta, 5.4, max_relative = 1e-12);
    }

    #[test]
    fn phase_reduction() {
        let w = CputParams::reference().omega;
        assert_relative_eq!(reduce_phase(-3.923, w), 1.077, max_relative = 1e-3);
        assert!(reduce_phase(2.5 + 1e-9, w) < 0.0);
    }

    #[test]
    fn nondimensionalize_literal() {
        let one = PhysicalCput {
            resistance: 1.0,
            inductance: 1.0,
            area: 1.0,
            permittivity: 1.0,
            mass: 1.0,
            damping: 1.0,
            stiffness: 1.0,
            drive: 1.0,
            gap: 1.0,
            frequency: 1.0,
        };
        let p = nondimensionalize(&one, 1.0, 1.0).unwrap();
        assert_eq!(p.epsilon, 0.5);
        assert_eq!(p.gamma, 2.0);
        assert_eq!(p.gap, 1.0);
        let q = nondimensionalize(&PhysicalCput { gap: 3e-7, ..one }, 1e7, 1e8).unwrap();
        assert_relative_eq!(q.gap / 1e8, 3e-7, max_relative = 1e-15);
        assert!(matches!(nondimensionalize(&PhysicalCput { mass: 0.0, ..one }, 1.0, 1.0), Err(Error::NonPositiveParameter("m"))));
    }

    #[test]
    fn negative_amplitudes_are_phase_shifts() {
        let p = CputParams::reference();
        let a = CputPolarState { rho: -3.0, phi: 0.2, r: -0.5, theta: 0.1 };
        let b = CputPolarState::from_array(canonical_polar(&p, &a.to_array()));
        assert!(b.rho > 0.0 && b.r > 0.0);
        for t in [0.0, 0.7, 3.1] {
            let (x, y) = (polar_to_cartesian(&p, &a, t, false), polar_to_cartesian(&p, &b, t, false));
            assert_relative_eq!(x.v, y.v, epsilon = 1e-12);
            assert_relative_eq!(x.y, y.y, epsilon = 1e-12);
            assert_relative_eq!(x.z, y.z, epsilon = 1e-12);
        }
        assert!(polar_distance(&p, &a.to_array(), &b.to_array()) < 1e-12);
    }
}
