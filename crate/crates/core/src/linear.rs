//! Spectral representation of a skew-Hermitian generator `Ω` and its exponential flow.
//!
//! `Ω` is diagonalised once as `Ω = V diag(iλ) V⁻¹` with `V` unitary; every later
//! operation (`e^{Ωt}x`, `Ωx`, `Ω̂⁻¹x`) is two dense products and a diagonal scaling.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::averaging::SamplingPlan;
use crate::{check_len, norm2, Error, Result};

/// Default tolerance below which an eigenphase is treated as zero (relative to the largest).
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-12;

const SKEW_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-8;
const RESIDUE_TOLERANCE: f64 = 1e-10;

/// A linear generator whose flow is unitary and whose kernel is known.
///
/// Implemented by the dense [`SkewHermitianOperator`] and by the Fourier-diagonal transport
/// operator of [`crate::wavebench`], so the averaged fields can be written once for both.
pub trait LinearFlow: Send + Sync {
    fn dim(&self) -> usize;

    /// `e^{Ωt} x` for a real state.
    fn flow(&self, t: f64, x: &[f64]) -> Result<Vec<f64>>;

    /// `Ω x`.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Pseudo-inverse `Ω̂⁻¹ x`: zero on the kernel, `Ω⁻¹` on its complement.
    fn pinv_apply(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Frobenius norm of the numerical average of `e^{Ωt}` restricted to the non-kernel
    /// eigen-directions. Zero for an exact average.
    fn flow_average_residual(&self, plan: &SamplingPlan) -> Result<f64>;
}

/// `Ω` together with its unitary eigenbasis and eigenphases.
#[derive(Clone, Debug)]
pub struct SkewHermitianOperator {
    matrix: DMatrix<Complex64>,
    basis: DMatrix<Complex64>,
    basis_inv: DMatrix<Complex64>,
    phases: Vec<f64>,
    kernel: Vec<bool>,
    zero_tolerance: f64,
    real: bool,
}

impl SkewHermitianOperator {
    /// Diagonalises a complex skew-Hermitian matrix.
    pub fn new(matrix: DMatrix<Complex64>, zero_tolerance: f64) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        check_len(rows, cols)?;
        let scale = matrix.norm().max(1.0);
        let defect = (&matrix + matrix.adjoint()).norm();
        if !(defect <= SKEW_TOLERANCE * scale) {
            return Err(Error::NotSkewHermitian { defect });
        }
        let real = matrix.iter().all(|z| z.im == 0.0);

        // H = iΩ is Hermitian with eigenvalues μ; Ω then has eigenvalues -iμ = iλ.
        let h = matrix.map(|z| z * Complex64::i());
        let h = (&h + h.adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..rows).collect();
        let lambda: Vec<f64> = eig.eigenvalues.iter().map(|mu| -mu).collect();
        order.sort_by(|&a, &b| lambda[b].abs().total_cmp(&lambda[a].abs()));

        let max_abs = order.first().map_or(0.0, |&k| lambda[k].abs());
        let threshold = zero_tolerance * max_abs;
        let mut basis = DMatrix::zeros(rows, rows);
        let mut phases = Vec::with_capacity(rows);
        let mut kernel = Vec::with_capacity(rows);
        for (dst, &src) in order.iter().enumerate() {
            basis.set_column(dst, &eig.eigenvectors.column(src));
            let is_zero = lambda[src].abs() <= threshold;
            phases.push(if is_zero { 0.0 } else { lambda[src] });
            kernel.push(is_zero);
        }
        let basis_inv = basis.adjoint();
        let defect = (&basis_inv * &basis - DMatrix::identity(rows, rows)).norm();
        if !(defect <= UNITARY_TOLERANCE * (rows.max(1) as f64)) {
            return Err(Error::SingularEigenbasis { defect });
        }
        Ok(Self { matrix, basis, basis_inv, phases, kernel, zero_tolerance, real })
    }

    /// Diagonalises a real skew-symmetric matrix.
    pub fn from_real(matrix: &DMatrix<f64>, zero_tolerance: f64) -> Result<Self> {
        Self::new(matrix.map(|v| Complex64::new(v, 0.0)), zero_tolerance)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Unitary eigenbasis `V`, columns ordered like [`Self::phases`].
    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &DMatrix<Complex64> {
        &self.basis_inv
    }

    /// Eigenphases `λ_k` (eigenvalues of `Ω` are `iλ_k`), sorted by decreasing magnitude.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `true` for each eigen-direction classified as kernel.
    pub fn kernel_mask(&self) -> &[bool] {
        &self.kernel
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    fn to_modes(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.phases.len();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for (k, yk) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += self.basis_inv[(k, j)] * xj;
            }
            *yk = acc;
        }
        y
    }

    fn from_modes(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = self.phases.len();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (k, yk) in y.iter().enumerate() {
            if *yk == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = self.basis.column(k);
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += col[j] * yk;
            }
        }
        x
    }

    fn spectral_map(&self, x: &[Complex64], scale: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
        let mut y = self.to_modes(x);
        for (k, yk) in y.iter_mut().enumerate() {
            *yk *= scale(k);
        }
        self.from_modes(&y)
    }

    fn real_part(&self, scale: f64, z: Vec<Complex64>) -> Result<Vec<f64>> {
        let residue = z.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if residue > RESIDUE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ComplexResidue { residue });
        }
        Ok(z.into_iter().map(|v| v.re).collect())
    }

    /// `e^{Ωt} x` for a complex state.
    pub fn flow_complex(&self, t: f64, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.phases.len(), x.len())?;
        Ok(self.spectral_map(x, |k| Complex64::from_polar(1.0, self.phases[k] * t)))
    }

    /// `Ω x` for a complex state.
    pub fn apply_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.phases.len(), x.len())?;
        Ok(self.spectral_map(x, |k| Complex64::new(0.0, self.phases[k])))
    }

    /// `Ω̂⁻¹ x` for a complex state.
    pub fn pinv_apply_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.phases.len(), x.len())?;
        Ok(self.spectral_map(x, |k| {
            if self.kernel[k] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / self.phases[k])
            }
        }))
    }

    /// `e^{Ωt}` restricted to the non-kernel directions, as a dense matrix.
    pub fn nonkernel_flow_matrix(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.phases.len();
        let mut scaled = self.basis.clone();
        for k in 0..n {
            let s = if self.kernel[k] {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(1.0, self.phases[k] * t)
            };
            for j in 0..n {
                scaled[(j, k)] *= s;
            }
        }
        scaled * &self.basis_inv
    }

    fn complexify(x: &[f64]) -> Vec<Complex64> {
        x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

fn complex_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

impl LinearFlow for SkewHermitianOperator {
    fn dim(&self) -> usize {
        self.phases.len()
    }

    fn flow(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.flow_complex(t, &Self::complexify(x))?;
        self.real_part(norm2(x), z)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.apply_complex(&Self::complexify(x))?;
        let scale = norm2(x).max(complex_norm(&z));
        self.real_part(scale, z)
    }

    fn pinv_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.pinv_apply_complex(&Self::complexify(x))?;
        let scale = norm2(x).max(complex_norm(&z));
        self.real_part(scale, z)
    }

    fn flow_average_residual(&self, plan: &SamplingPlan) -> Result<f64> {
        let n = self.phases.len();
        let weights = plan.weights()?;
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        for (t, w) in plan.times().zip(weights) {
            acc += self.nonkernel_flow_matrix(t) * Complex64::new(w, 0.0);
        }
        Ok(acc.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rotation(omega: f64) -> SkewHermitianOperator {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, omega, -omega, 0.0]);
        SkewHermitianOperator::from_real(&m, DEFAULT_ZERO_TOLERANCE).unwrap()
    }

    #[test]
    fn rotation_flow_is_exact() {
        let op = rotation(1.0);
        let t = std::f64::consts::FRAC_PI_2;
        let y = op.flow(t, &[1.0, 0.0]).unwrap();
        assert!((y[0] - 0.0).abs() < 1e-14);
        assert!((y[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_is_all_kernel() {
        let op = SkewHermitianOperator::from_real(&DMatrix::zeros(1, 1), DEFAULT_ZERO_TOLERANCE).unwrap();
        assert_eq!(op.phases(), &[0.0]);
        assert_eq!(op.pinv_apply(&[3.0]).unwrap(), vec![0.0]);
        assert_eq!(op.flow(5.0, &[2.5]).unwrap(), vec![2.5]);
    }

    #[test]
    fn rejects_symmetric_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            SkewHermitianOperator::from_real(&m, DEFAULT_ZERO_TOLERANCE),
            Err(Error::NotSkewHermitian { .. })
        ));
    }

    #[test]
    fn flow_rejects_wrong_length() {
        let op = rotation(2.0);
        assert!(matches!(op.flow(1.0, &[1.0]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn phases_sorted_by_magnitude() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        m[(2, 3)] = 3.0;
        m[(3, 2)] = -3.0;
        let op = SkewHermitianOperator::from_real(&m, DEFAULT_ZERO_TOLERANCE).unwrap();
        let abs: Vec<f64> = op.phases().iter().map(|l| l.abs()).collect();
        assert_relative_eq!(abs[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(abs[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pinv_inverts_rotation() {
        let op = rotation(2.0);
        let x = [0.3, -1.7];
        let back = op.apply(&op.pinv_apply(&x).unwrap()).unwrap();
        assert_relative_eq!(back[0], x[0], epsilon = 1e-14);
        assert_relative_eq!(back[1], x[1], epsilon = 1e-14);
    }
}
