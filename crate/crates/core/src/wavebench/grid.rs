//! Periodic collocation grid, its 2-D FFT, and the transport generator `L = a∂ₓ + b∂ᵧ`
//! acting diagonally on Fourier coefficients.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::averaging::SamplingPlan;
use crate::linear::LinearFlow;
use crate::{check_len, Error, Result};

/// Default kernel threshold for `L̂⁻¹`, relative to the largest `|ω_jk|`.
pub const PDE_ZERO_TOLERANCE: f64 = 1e-10;

/// `M₁ × M₂` collocation points on `[0, L₁) × [0, L₂)`, stored x-major (`a·M₂ + b`).
pub struct Grid2D {
    pub l1: f64,
    pub l2: f64,
    pub m1: usize,
    pub m2: usize,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D").field("l1", &self.l1).field("l2", &self.l2).field("m1", &self.m1).field("m2", &self.m2).finish()
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.l1 == other.l1 && self.l2 == other.l2 && self.m1 == other.m1 && self.m2 == other.m2
    }
}

impl Grid2D {
    pub fn new(l1: f64, l2: f64, m1: usize, m2: usize) -> Result<Arc<Self>> {
        if !(l1 > 0.0 && l1.is_finite()) {
            return Err(Error::NonPositiveParameter("L1"));
        }
        if !(l2 > 0.0 && l2.is_finite()) {
            return Err(Error::NonPositiveParameter("L2"));
        }
        if m1 == 0 || m2 == 0 || m1 % 2 == 1 || m2 % 2 == 1 {
            return Err(Error::DomainError(format!("mode counts must be positive and even, got {m1}x{m2}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            l1,
            l2,
            m1,
            m2,
            fwd1: planner.plan_fft_forward(m1),
            inv1: planner.plan_fft_inverse(m1),
            fwd2: planner.plan_fft_forward(m2),
            inv2: planner.plan_fft_inverse(m2),
        }))
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, a: usize) -> f64 {
        a as f64 * self.l1 / self.m1 as f64
    }

    pub fn y(&self, b: usize) -> f64 {
        b as f64 * self.l2 / self.m2 as f64
    }

    /// Collocation coordinates in storage order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.m1).flat_map(move |a| (0..self.m2).map(move |b| (self.x(a), self.y(b))))
    }

    /// Signed wavenumber of FFT index `i` out of `m`; the Nyquist index maps to 0.
    pub fn wavenumber(i: usize, m: usize) -> i64 {
        if 2 * i == m {
            0
        } else if 2 * i < m {
            i as i64
        } else {
            i as i64 - m as i64
        }
    }

    /// `(j, k)` for storage index `idx`.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (Self::wavenumber(idx / self.m2, self.m1), Self::wavenumber(idx % self.m2, self.m2))
    }

    /// `ω_jk = 2π(a·j/L₁ + b·k/L₂)` per storage index.
    pub fn frequencies(&self, a: f64, b: f64) -> Vec<f64> {
        let tau = 2.0 * std::f64::consts::PI;
        (0..self.len())
            .map(|idx| {
                let (j, k) = self.mode(idx);
                tau * (a * j as f64 / self.l1 + b * k as f64 / self.l2)
            })
            .collect()
    }

    fn transform(&self, data: &mut [Complex64], along2: &Arc<dyn Fft<f64>>, along1: &Arc<dyn Fft<f64>>) {
        for row in data.chunks_exact_mut(self.m2) {
            along2.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.m1];
        for b in 0..self.m2 {
            for a in 0..self.m1 {
                col[a] = data[a * self.m2 + b];
            }
            along1.process(&mut col);
            for a in 0..self.m1 {
                data[a * self.m2 + b] = col[a];
            }
        }
    }

    /// Normalised coefficients `v̂_jk` with `v = Σ v̂_jk e^{2πi(jx/L₁ + ky/L₂)}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / self.len() as f64;
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        self.transform(&mut data, &self.fwd2, &self.fwd1);
        data
    }

    /// Grid values from coefficients (real part).
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inv2, &self.inv1);
        data.into_iter().map(|z| z.re).collect()
    }

    /// `ifft(m ⊙ fft(values))`.
    pub fn multiply(&self, values: &[f64], multiplier: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let mut c = self.forward(values);
        for (i, z) in c.iter_mut().enumerate() {
            *z *= multiplier(i);
        }
        self.inverse(&c)
    }
}

/// Real grid values with lazily computed Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn new(grid: Arc<Grid2D>, values: Vec<f64>) -> Result<Self> {
        check_len(grid.len(), values.len())?;
        Ok(Self { grid, values, coeffs: OnceLock::new() })
    }

    /// Samples `g(x, y)` at the collocation points.
    pub fn from_fn(grid: Arc<Grid2D>, g: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.points().map(|(x, y)| g(x, y)).collect();
        Self { grid, values, coeffs: OnceLock::new() }
    }

    pub fn from_coefficients(grid: Arc<Grid2D>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(grid.len(), coeffs.len())?;
        let values = grid.inverse(&coeffs);
        Ok(Self { grid, values, coeffs: OnceLock::from(coeffs) })
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| self.grid.forward(&self.values))
    }

    pub fn same_grid(&self, other: &SpectralField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// `(x, y, value)` rows for export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.grid.points().zip(&self.values).map(|((x, y), v)| (x, y, *v))
    }
}

/// The transport generator `L = a∂ₓ + b∂ᵧ` on a grid.
#[derive(Clone, Debug)]
pub struct AdvectionOperator {
    grid: Arc<Grid2D>,
    freqs: Vec<f64>,
    kernel: Vec<bool>,
}

impl AdvectionOperator {
    pub fn new(grid: Arc<Grid2D>, a: f64, b: f64, zero_tolerance: f64) -> Self {
        let freqs = grid.frequencies(a, b);
        let max = freqs.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let threshold = zero_tolerance * max;
        let kernel: Vec<bool> = freqs.iter().map(|w| w.abs() <= threshold).collect();
        let smallest = freqs.iter().zip(&kernel).filter(|(_, k)| !**k).fold(f64::INFINITY, |m, (w, _)| m.min(w.abs()));
        log::debug!("advection operator: {} kernel modes, smallest retained |ω| = {smallest:.3e}", kernel.iter().filter(|k| **k).count());
        if smallest.is_finite() && smallest < 1e-6 * max {
            log::warn!("near-resonant mode retained: |ω| = {smallest:.3e} (max {max:.3e}); L̂⁻¹ amplifies it by {:.3e}", 1.0 / smallest);
        }
        Self { grid, freqs, kernel }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn kernel_mask(&self) -> &[bool] {
        &self.kernel
    }

    pub fn max_frequency(&self) -> f64 {
        self.freqs.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Smallest retained `|ω_jk|`.
    pub fn smallest_retained_frequency(&self) -> f64 {
        self.freqs.iter().zip(&self.kernel).filter(|(_, k)| !**k).fold(f64::INFINITY, |m, (w, _)| m.min(w.abs()))
    }
}

impl LinearFlow for AdvectionOperator {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn flow(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(self.grid.multiply(x, |i| Complex64::from_polar(1.0, self.freqs[i] * t)))
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(self.grid.multiply(x, |i| Complex64::new(0.0, self.freqs[i])))
    }

    fn pinv_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        Ok(self.grid.multiply(x, |i| {
            if self.kernel[i] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / self.freqs[i])
            }
        }))
    }

    fn flow_average_residual(&self, plan: &SamplingPlan) -> Result<f64> {
        let weights = plan.weights()?;
        let times: Vec<f64> = plan.times().collect();
        let mut total = 0.0;
        for (w, k) in self.freqs.iter().zip(&self.kernel) {
            if *k {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, wt) in times.iter().zip(&weights) {
                acc += Complex64::from_polar(*wt, w * t);
            }
            total += acc.norm_sqr();
        }
        Ok(total.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Grid2D::new(2.0, 1.0, 8, 6).unwrap();
        let f = SpectralField::from_fn(g.clone(), |x, y| (x * 3.0).sin() + y.cos() * 0.5 + 0.1 * x * y);
        let back = g.inverse(f.coefficients());
        for (a, b) in back.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval() {
        let g = Grid2D::new(1.3, 0.7, 10, 4).unwrap();
        let f = SpectralField::from_fn(g.clone(), |x, y| (x * 5.0).cos() * (y + 1.0));
        let grid_norm: f64 = f.values().iter().map(|v| v * v).sum::<f64>();
        let coeff_norm: f64 = f.coefficients().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.len() as f64;
        assert!((grid_norm - coeff_norm).abs() < 1e-12 * grid_norm);
    }

    #[test]
    fn nyquist_has_zero_frequency() {
        let g = Grid2D::new(1.0, 1.0, 4, 4).unwrap();
        assert_eq!(Grid2D::wavenumber(2, 4), 0);
        assert_eq!(Grid2D::wavenumber(3, 4), -1);
        let freqs = g.frequencies(1.0, 1.0);
        assert_eq!(freqs[2 * 4 + 2], 0.0);
    }

    #[test]
    fn odd_modes_rejected() {
        assert!(Grid2D::new(1.0, 1.0, 5, 4).is_err());
        assert!(Grid2D::new(-1.0, 1.0, 4, 4).is_err());
    }
}
