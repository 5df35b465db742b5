//! Fermi–Pasta–Ulam chain of `2m` unit masses joined alternately by stiff harmonic
//! springs (frequency `ω`) and soft quartic springs.
//!
//! Three coordinate systems appear:
//! * physical `(Q, P)` of the point masses;
//! * transformed `(q, p)`, the 45° rotation separating centres of mass (`q₁..q_m`) from
//!   stiff-spring elongations (`q_{m+1}..q_{2m}`);
//! * the canonical form `[q_slow, v_slow, q_fast, v_fast]` with `v_fast = p_fast/ω`, in the
//!   fast time `t = ωs`, where the system reads `x' = Ωx + εF(x)` with `ε = 1/ω`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::averaged::OscillatorySystem;
use crate::linear::{SkewHermitianOperator, DEFAULT_ZERO_TOLERANCE};
use crate::{check_len, Error, Result};

/// Chain size and stiffness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpuParams {
    pub m: usize,
    pub omega: f64,
}

impl FpuParams {
    pub fn new(m: usize, omega: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::NonPositiveParameter("m"));
        }
        if !(omega > 1.0 && omega.is_finite()) {
            return Err(Error::DomainError(format!("omega must exceed 1, got {omega}")));
        }
        Ok(Self { m, omega })
    }

    /// `m = 3`, `ω = 200`.
    pub fn reference() -> Self {
        Self { m: 3, omega: 200.0 }
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.omega
    }

    /// Dimension `4m` of the canonical state.
    pub fn dim(&self) -> usize {
        4 * self.m
    }
}

/// Soft-spring elongations (times `√2`): `s_k = (q_k - q_{m+k}) - (q_{k-1} + q_{m+k-1})`,
/// with out-of-range terms dropped.
fn soft_stretches(m: usize, q: &[f64]) -> Vec<f64> {
    (0..=m)
        .map(|k| {
            let right = if k < m { q[k] - q[m + k] } else { 0.0 };
            let left = if k > 0 { q[k - 1] + q[m + k - 1] } else { 0.0 };
            right - left
        })
        .collect()
}

/// Gradient of the quartic part `¼Σ s_k⁴` with respect to `q`.
pub fn quartic_gradient(params: &FpuParams, q: &[f64]) -> Result<Vec<f64>> {
    let m = params.m;
    check_len(2 * m, q.len())?;
    let s = soft_stretches(m, q);
    let mut grad = vec![0.0; 2 * m];
    for k in 0..m {
        let a = s[k].powi(3);
        let b = s[k + 1].powi(3);
        grad[k] = a - b;
        grad[m + k] = -a - b;
    }
    Ok(grad)
}

/// Full potential gradient `∇V(q)` including the stiff springs.
pub fn potential_gradient(params: &FpuParams, q: &[f64]) -> Result<Vec<f64>> {
    let mut g = quartic_gradient(params, q)?;
    let w2 = params.omega * params.omega;
    for i in params.m..2 * params.m {
        g[i] += w2 * q[i];
    }
    Ok(g)
}

/// Writes `∇V(q)` into `out` without allocating; for the benchmark integrator.
pub fn potential_gradient_into(params: &FpuParams, q: &[f64], out: &mut [f64]) {
    let m = params.m;
    let w2 = params.omega * params.omega;
    let stretch = |k: usize| {
        let right = if k < m { q[k] - q[m + k] } else { 0.0 };
        let left = if k > 0 { q[k - 1] + q[m + k - 1] } else { 0.0 };
        right - left
    };
    let mut prev = stretch(0).powi(3);
    for k in 0..m {
        let next = stretch(k + 1).powi(3);
        out[k] = prev - next;
        out[m + k] = -prev - next + w2 * q[m + k];
        prev = next;
    }
}

/// `H(q, p) = ½|p|² + (ω²/2)Σq_fast² + ¼Σs_k⁴`.
pub fn hamiltonian(params: &FpuParams, q: &[f64], p: &[f64]) -> Result<f64> {
    let m = params.m;
    check_len(2 * m, q.len())?;
    check_len(2 * m, p.len())?;
    let kinetic = 0.5 * p.iter().map(|v| v * v).sum::<f64>();
    let stiff = 0.5 * params.omega.powi(2) * q[m..].iter().map(|v| v * v).sum::<f64>();
    let soft = 0.25 * soft_stretches(m, q).iter().map(|s| s.powi(4)).sum::<f64>();
    Ok(kinetic + stiff + soft)
}

/// Hamiltonian in the physical coordinates, `Q₀ = Q_{2m+1} = 0`.
pub fn physical_hamiltonian(params: &FpuParams, big_q: &[f64], big_p: &[f64]) -> Result<f64> {
    let m = params.m;
    check_len(2 * m, big_q.len())?;
    check_len(2 * m, big_p.len())?;
    let at = |j: usize| if j == 0 || j == 2 * m + 1 { 0.0 } else { big_q[j - 1] };
    let kinetic = 0.5 * big_p.iter().map(|v| v * v).sum::<f64>();
    let stiff = 0.25 * params.omega.powi(2) * (1..=m).map(|i| (at(2 * i) - at(2 * i - 1)).powi(2)).sum::<f64>();
    let soft = (0..=m).map(|i| (at(2 * i + 1) - at(2 * i)).powi(4)).sum::<f64>();
    Ok(kinetic + stiff + soft)
}

fn rotate_pairs(m: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * m];
    for i in 0..m {
        let (lo, hi) = (x[2 * i], x[2 * i + 1]);
        out[i] = (hi + lo) * FRAC_1_SQRT_2;
        out[m + i] = (hi - lo) * FRAC_1_SQRT_2;
    }
    out
}

fn unrotate_pairs(m: usize, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 2 * m];
    for i in 0..m {
        let (c, d) = (x[i], x[m + i]);
        out[2 * i] = (c - d) * FRAC_1_SQRT_2;
        out[2 * i + 1] = (c + d) * FRAC_1_SQRT_2;
    }
    out
}

/// `(Q, P) → (q, p)`.
pub fn canonical_transform(params: &FpuParams, big_q: &[f64], big_p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(2 * params.m, big_q.len())?;
    check_len(2 * params.m, big_p.len())?;
    Ok((rotate_pairs(params.m, big_q), rotate_pairs(params.m, big_p)))
}

/// `(q, p) → (Q, P)`.
pub fn inverse_canonical_transform(params: &FpuParams, q: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(2 * params.m, q.len())?;
    check_len(2 * params.m, p.len())?;
    Ok((unrotate_pairs(params.m, q), unrotate_pairs(params.m, p)))
}

/// Packs `(q, p)` into the canonical state `[q_slow, v_slow, q_fast, v_fast]`.
pub fn pack_canonical(params: &FpuParams, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let m = params.m;
    check_len(2 * m, q.len())?;
    check_len(2 * m, p.len())?;
    let mut x = Vec::with_capacity(4 * m);
    x.extend_from_slice(&q[..m]);
    x.extend_from_slice(&p[..m]);
    x.extend_from_slice(&q[m..]);
    x.extend(p[m..].iter().map(|v| v / params.omega));
    Ok(x)
}

/// Unpacks a canonical state into `(q, p)`.
pub fn unpack_canonical(params: &FpuParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = params.m;
    check_len(4 * m, x.len())?;
    let q = [&x[..m], &x[2 * m..3 * m]].concat();
    let mut p = x[m..2 * m].to_vec();
    p.extend(x[3 * m..].iter().map(|v| v * params.omega));
    Ok((q, p))
}

/// `I_i = ½(p_{m+i}² + ω²q_{m+i}²)`.
pub fn stiff_energies(params: &FpuParams, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let m = params.m;
    check_len(2 * m, q.len())?;
    check_len(2 * m, p.len())?;
    Ok((0..m).map(|i| 0.5 * (p[m + i].powi(2) + params.omega.powi(2) * q[m + i].powi(2))).collect())
}

/// Canonical-form nonlinearity `F = (v_slow, f, 0, g/ω)`.
pub fn canonical_nonlinearity(params: &FpuParams, x: &[f64]) -> Vec<f64> {
    let m = params.m;
    let q = [&x[..m], &x[2 * m..3 * m]].concat();
    let grad = quartic_gradient(params, &q).expect("canonical state has length 4m");
    let mut out = vec![0.0; 4 * m];
    out[..m].copy_from_slice(&x[m..2 * m]);
    for i in 0..m {
        out[m + i] = -grad[i];
        out[3 * m + i] = -grad[m + i] / params.omega;
    }
    out
}

/// The block generator: zero on the slow pairs, `[[0, 1], [-1, 0]]` on each fast pair.
pub fn canonical_operator(params: &FpuParams) -> Result<SkewHermitianOperator> {
    let m = params.m;
    let mut omega = DMatrix::zeros(4 * m, 4 * m);
    for i in 0..m {
        omega[(2 * m + i, 3 * m + i)] = 1.0;
        omega[(3 * m + i, 2 * m + i)] = -1.0;
    }
    SkewHermitianOperator::from_real(&omega, DEFAULT_ZERO_TOLERANCE)
}

/// The chain as an [`OscillatorySystem`] in the fast time `t = ωs`.
pub fn to_canonical_form(params: &FpuParams) -> Result<OscillatorySystem> {
    let op = canonical_operator(params)?;
    let p = *params;
    Ok(OscillatorySystem::new(op, params.epsilon(), move |x, _| canonical_nonlinearity(&p, x)))
}

/// Rescales a canonical state to the closed-form packing (fast momenta `p = ωv`).
pub fn closed_form_state(params: &FpuParams, x: &[f64]) -> Result<Vec<f64>> {
    check_len(params.dim(), x.len())?;
    let m = params.m;
    Ok(x.iter().enumerate().map(|(i, v)| if i >= 3 * m { v * params.omega } else { *v }).collect())
}

/// Expresses a canonical averaged field in the closed-form packing.
pub fn closed_form_rate(params: &FpuParams, field: &[f64]) -> Result<Vec<f64>> {
    closed_form_state(params, field)
}

/// Closed-form classically averaged field for `m = 3`, with
/// `Y = [x₁, x₂, x₃, y₁, y₂, y₃, x₄, x₅, x₆, y₄, y₅, y₆]` (fast momenta unscaled).
pub fn exact_averaged_field(omega: f64, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != 12 {
        return Err(Error::WrongDimension { expected: 12, found: y.len() });
    }
    let (x1, x2, x3, y1, y2, y3) = (y[0], y[1], y[2], y[3], y[4], y[5]);
    let (x4, x5, x6, y4, y5, y6) = (y[6], y[7], y[8], y[9], y[10], y[11]);
    let w2 = omega * omega;
    let w4 = w2 * w2;
    let sq = |v: f64| v * v;
    let cu = |v: f64| v * v * v;

    let left = x1 * (3.0 * sq(y4) + (2.0 * sq(x1) + 3.0 * sq(x4)) * w2);
    let mid12 = (x1 - x2) * (3.0 * sq(y4 + y5) + (2.0 * sq(x1 - x2) + 3.0 * sq(x4 + x5)) * w2);
    let mid23 = (x2 - x3) * (3.0 * sq(y5 + y6) + (2.0 * sq(x2 - x3) + 3.0 * sq(x5 + x6)) * w2);
    let right = x3 * (3.0 * sq(y6) + (2.0 * sq(x3) + 3.0 * sq(x6)) * w2);

    let f7 = 3.0
        * ((4.0 * (2.0 * y4 + y5) * sq(x1) - 8.0 * x2 * (y4 + y5) * x1
            + (2.0 * sq(x4) + 2.0 * x5 * x4 + sq(x5)) * y4
            + sq(x4 + x5) * y5
            + 4.0 * sq(x2) * (y4 + y5))
            * w2
            + 2.0 * cu(y4)
            + 3.0 * y5 * sq(y4)
            + 3.0 * sq(y5) * y4
            + cu(y5))
        / (8.0 * w4);
    let f8 = 3.0
        * (cu(y4) + 3.0 * y5 * sq(y4) + 3.0 * sq(y5) * y4
            + (4.0 * sq(x1 - x2) + sq(x4 + x5)) * w2 * y4
            + 2.0 * cu(y5)
            + cu(y6)
            + 3.0 * y5 * sq(y6)
            + ((sq(x4) + 2.0 * x5 * x4 + 2.0 * sq(x5) + sq(x6)
                + 4.0 * (sq(x1) - 2.0 * x2 * x1 + 2.0 * sq(x2) + sq(x3) - 2.0 * x2 * x3)
                + 2.0 * x5 * x6)
                * y5
                + (4.0 * sq(x2 - x3) + sq(x5 + x6)) * y6)
                * w2
            + 3.0 * sq(y5) * y6)
        / (8.0 * w4);
    let f9 = 3.0
        * (cu(y5) + 3.0 * y6 * sq(y5) + 3.0 * sq(y6) * y5 + 2.0 * cu(y6)
            + (4.0 * (y5 + y6) * sq(x2) - 8.0 * x3 * (y5 + y6) * x2
                + sq(x5 + x6) * y5
                + (sq(x5) + 2.0 * x6 * x5 + 2.0 * sq(x6)) * y6
                + 4.0 * sq(x3) * (y5 + 2.0 * y6))
                * w2)
        / (8.0 * w4);
    let f10 = 3.0
        * (-(2.0 * x4 + x5) * sq(y4) - 2.0 * (x4 + x5) * y5 * y4 - (x4 + x5) * sq(y5)
            - (4.0 * (2.0 * x4 + x5) * sq(x1) - 8.0 * x2 * (x4 + x5) * x1
                + 4.0 * sq(x2) * (x4 + x5)
                + (2.0 * x4 + x5) * (sq(x4) + x5 * x4 + sq(x5)))
                * w2)
        / (8.0 * w2);
    let f11 = -3.0
        * ((4.0 * (x4 + x5) * sq(x1) - 8.0 * x2 * (x4 + x5) * x1 + 4.0 * sq(x3) * (x5 + x6)
            - 8.0 * x2 * x3 * (x5 + x6)
            + 4.0 * sq(x2) * (x4 + 2.0 * x5 + x6)
            + (x4 + 2.0 * x5 + x6) * (sq(x4) + (x5 - x6) * x4 + sq(x5) + sq(x6) + x5 * x6))
            * w2
            + x4 * sq(y4 + y5)
            + x6 * sq(y5 + y6)
            + x5 * (sq(y4) + 2.0 * y5 * y4 + 2.0 * sq(y5) + sq(y6) + 2.0 * y5 * y6))
        / (8.0 * w2);
    let f12 = 3.0
        * (-(x5 + x6) * sq(y5) - 2.0 * (x5 + x6) * y6 * y5 - (x5 + 2.0 * x6) * sq(y6)
            - (4.0 * (x5 + x6) * sq(x2) - 8.0 * x3 * (x5 + x6) * x2
                + (x5 + 2.0 * x6) * (4.0 * sq(x3) + sq(x5) + sq(x6) + x5 * x6))
                * w2)
        / (8.0 * w2);

    Ok(vec![
        y1,
        y2,
        y3,
        -(left + mid12) / (2.0 * w2),
        (mid12 - mid23) / (2.0 * w2),
        (mid23 - right) / (2.0 * w2),
        f7,
        f8,
        f9,
        f10,
        f11,
        f12,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::LinearFlow;
    use approx::assert_relative_eq;

    fn initial() -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; 6], vec![2.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    }

    #[test]
    fn reference_energy() {
        let p = FpuParams::reference();
        let (q, mom) = initial();
        assert_eq!(hamiltonian(&p, &q, &mom).unwrap(), 2.5);
        assert_eq!(stiff_energies(&p, &q, &mom).unwrap(), vec![0.5, 0.0, 0.0]);
        assert_eq!(hamiltonian(&p, &[0.0; 6], &[0.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn energy_even_in_momentum() {
        let p = FpuParams::reference();
        let q = [0.1, -0.2, 0.3, 0.01, 0.02, -0.01];
        let mom = [0.5, 1.0, -0.3, 2.0, 0.1, -1.0];
        let neg: Vec<f64> = mom.iter().map(|v| -v).collect();
        assert_eq!(hamiltonian(&p, &q, &mom).unwrap(), hamiltonian(&p, &q, &neg).unwrap());
    }

    #[test]
    fn transformed_energy_matches_physical() {
        let p = FpuParams::reference();
        let big_q = [0.3, -0.1, 0.25, 0.4, -0.2, 0.05];
        let big_p = [1.0, -0.5, 0.2, 0.0, 0.7, -1.1];
        let (q, mom) = canonical_transform(&p, &big_q, &big_p).unwrap();
        assert_relative_eq!(
            hamiltonian(&p, &q, &mom).unwrap(),
            physical_hamiltonian(&p, &big_q, &big_p).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn transform_round_trip_and_norm() {
        let p = FpuParams::reference();
        let big_q = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let (q, mom) = canonical_transform(&p, &big_q, &[0.0; 6]).unwrap();
        assert_relative_eq!(q[0], 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(q[3], 0.0);
        let (bq, bp) = inverse_canonical_transform(&p, &q, &mom).unwrap();
        for (a, b) in bq.iter().zip(big_q) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(bp.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = FpuParams::new(3, 7.0).unwrap();
        let q = [0.3, -0.1, 0.25, 0.04, -0.02, 0.05];
        let mom = [0.0; 6];
        let g = potential_gradient(&p, &q).unwrap();
        let mut g2 = vec![0.0; 6];
        potential_gradient_into(&p, &q, &mut g2);
        for i in 0..6 {
            let h = 1e-6;
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let fd = (hamiltonian(&p, &qp, &mom).unwrap() - hamiltonian(&p, &qm, &mom).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
            assert!((g[i] - g2[i]).abs() <= 1e-14 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn canonical_operator_spectrum() {
        let p = FpuParams::reference();
        let op = canonical_operator(&p).unwrap();
        let zeros = op.phases().iter().filter(|l| **l == 0.0).count();
        let ones = op.phases().iter().filter(|l| (l.abs() - 1.0).abs() < 1e-12).count();
        assert_eq!(zeros, 6);
        assert_eq!(ones, 6);
        let sys = to_canonical_form(&p).unwrap();
        assert_eq!(sys.epsilon, 0.005);
        assert!(sys.eval(&[0.0; 12], 0.0).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(op.dim(), 12);
    }

    #[test]
    fn pack_round_trip() {
        let p = FpuParams::reference();
        let q = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let mom = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x = pack_canonical(&p, &q, &mom).unwrap();
        assert_eq!(x[9], 4.0 / 200.0);
        let (q2, p2) = unpack_canonical(&p, &x).unwrap();
        assert_eq!(q2, q.to_vec());
        for (a, b) in p2.iter().zip(mom) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_is_odd() {
        let y: Vec<f64> = (0..12).map(|i| 0.1 * (i as f64 + 1.0).sin()).collect();
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = exact_averaged_field(200.0, &y).unwrap();
        let b = exact_averaged_field(200.0, &neg).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_eq!(*u, -*v);
        }
        assert!(exact_averaged_field(200.0, &[0.0; 12]).unwrap().iter().all(|v| *v == 0.0));
        assert!(matches!(exact_averaged_field(200.0, &[0.0; 11]), Err(Error::WrongDimension { .. })));
    }
}
