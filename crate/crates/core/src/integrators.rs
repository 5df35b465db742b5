//! Fixed-step integrators: classical RK4, a symmetric exponential splitting for
//! `x' = Ωx + εF(x, t)`, and a fourth-order symplectic composition for separable
//! Hamiltonians.

use crate::averaged::OscillatorySystem;
use crate::linear::LinearFlow;
use crate::{Error, Result};

/// Recorded states at increasing times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn with_capacity(n: usize) -> Self {
        Self { times: Vec::with_capacity(n), states: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, t: f64, x: Vec<f64>) {
        self.times.push(t);
        self.states.push(x);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times.last().map(|&t| (t, self.states.last().unwrap().as_slice()))
    }

    /// Applies `f(t, x)` to every record.
    pub fn map<F>(&self, mut f: F) -> Result<Trajectory>
    where
        F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    {
        let mut out = Trajectory::with_capacity(self.len());
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push(*t, f(*t, x)?);
        }
        Ok(out)
    }
}

/// Number of steps of size `h` needed to reach `t_end`, the last one possibly shorter.
fn step_count(h: f64, t_end: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidStep(t_end));
    }
    let n = (t_end / h - 1e-9).ceil().max(0.0) as usize;
    Ok(n)
}

pub(crate) fn axpy(x: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + a * ki).collect()
}

/// Shared driver: `step(t, h, x)` advances one step; records every `stride` steps and
/// always at `t_end`.
pub(crate) fn drive<S>(x0: &[f64], h: f64, t_end: f64, stride: usize, mut step: S) -> Result<Trajectory>
where
    S: FnMut(f64, f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = step_count(h, t_end)?;
    let stride = stride.max(1);
    let mut traj = Trajectory::with_capacity(n / stride + 2);
    traj.push(0.0, x0.to_vec());
    let mut x = x0.to_vec();
    for i in 0..n {
        let t = i as f64 * h;
        let t_next = if i + 1 == n { t_end } else { (i + 1) as f64 * h };
        x = step(t, t_next - t, &x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { time: t_next, trajectory: Box::new(traj) });
        }
        if (i + 1) % stride == 0 || i + 1 == n {
            traj.push(t_next, x.clone());
        }
    }
    Ok(traj)
}

/// One classical RK4 step.
pub fn rk4_step<F>(field: &mut F, t: f64, h: f64, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    let k1 = field(x, t)?;
    let k2 = field(&axpy(x, 0.5 * h, &k1), t + 0.5 * h)?;
    let k3 = field(&axpy(x, 0.5 * h, &k2), t + 0.5 * h)?;
    let k4 = field(&axpy(x, h, &k3), t + h)?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates `x' = field(x, t)` from `0` to `t_end` with RK4, recording every `stride` steps.
pub fn rk4<F>(mut field: F, x0: &[f64], h: f64, t_end: f64, stride: usize) -> Result<Trajectory>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    drive(x0, h, t_end, stride, |t, h, x| rk4_step(&mut field, t, h, x))
}

/// RK4 on a fixed-size state without allocation; returns only the final state.
pub fn rk4_final<const N: usize, F>(mut field: F, x0: [f64; N], h: f64, t_end: f64) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N], f64) -> Result<[f64; N]>,
{
    let n = step_count(h, t_end)?;
    let mut x = x0;
    let shift = |x: &[f64; N], a: f64, k: &[f64; N]| {
        let mut y = *x;
        for i in 0..N {
            y[i] += a * k[i];
        }
        y
    };
    for i in 0..n {
        let t = i as f64 * h;
        let dt = if i + 1 == n { t_end - t } else { h };
        let k1 = field(&x, t)?;
        let k2 = field(&shift(&x, 0.5 * dt, &k1), t + 0.5 * dt)?;
        let k3 = field(&shift(&x, 0.5 * dt, &k2), t + 0.5 * dt)?;
        let k4 = field(&shift(&x, dt, &k3), t + dt)?;
        for j in 0..N {
            x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            let mut trajectory = Trajectory::default();
            trajectory.push(t + dt, x.to_vec());
            return Err(Error::NonFiniteState { time: t + dt, trajectory: Box::new(trajectory) });
        }
    }
    Ok(x)
}

/// One step of the symmetric exponential splitting:
/// half linear flow, kick `x += hεF(x, t + h/2)`, half linear flow. `h` may be negative.
pub fn exp_symmetric2_step<L: LinearFlow>(sys: &OscillatorySystem<L>, t: f64, h: f64, x: &[f64]) -> Result<Vec<f64>> {
    let half = sys.operator.flow(0.5 * h, x)?;
    let f = sys.eval(&half, t + 0.5 * h)?;
    let kicked = axpy(&half, h * sys.epsilon, &f);
    sys.operator.flow(0.5 * h, &kicked)
}

/// Integrates the full oscillatory system with [`exp_symmetric2_step`].
pub fn exp_symmetric2<L: LinearFlow>(
    sys: &OscillatorySystem<L>,
    x0: &[f64],
    h: f64,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory> {
    drive(x0, h, t_end, stride, |t, h, x| exp_symmetric2_step(sys, t, h, x))
}

/// Yoshida triple-jump coefficients `(c₁, c₀)` with `c₁ = 1/(2 - 2^{1/3})`, `c₀ = 1 - 2c₁`.
pub fn yoshida_coefficients() -> (f64, f64) {
    let c1 = 1.0 / (2.0 - 2f64.cbrt());
    (c1, 1.0 - 2.0 * c1)
}

fn verlet(grad: &mut impl FnMut(&[f64], &mut [f64]), q: &mut [f64], p: &mut [f64], force: &mut [f64], h: f64) {
    for (pi, fi) in p.iter_mut().zip(force.iter()) {
        *pi -= 0.5 * h * fi;
    }
    for (qi, pi) in q.iter_mut().zip(p.iter()) {
        *qi += h * pi;
    }
    grad(q, force);
    for (pi, fi) in p.iter_mut().zip(force.iter()) {
        *pi -= 0.5 * h * fi;
    }
}

/// Fourth-order symplectic integrator for `H = |p|²/2 + V(q)`: a triple jump of velocity
/// Verlet. `grad(q, out)` writes `∇V(q)`. Recorded states are `[q, p]`.
pub fn symplectic4<G>(mut grad: G, q0: &[f64], p0: &[f64], h: f64, t_end: f64, stride: usize) -> Result<Trajectory>
where
    G: FnMut(&[f64], &mut [f64]),
{
    crate::check_len(q0.len(), p0.len())?;
    let n = step_count(h, t_end)?;
    let stride = stride.max(1);
    let d = q0.len();
    let (c1, c0) = yoshida_coefficients();
    let mut q = q0.to_vec();
    let mut p = p0.to_vec();
    let mut force = vec![0.0; d];
    grad(&q, &mut force);
    let mut traj = Trajectory::with_capacity(n / stride + 2);
    traj.push(0.0, [q0, p0].concat());
    for i in 0..n {
        let t = i as f64 * h;
        let t_next = if i + 1 == n { t_end } else { (i + 1) as f64 * h };
        let dt = t_next - t;
        verlet(&mut grad, &mut q, &mut p, &mut force, c1 * dt);
        verlet(&mut grad, &mut q, &mut p, &mut force, c0 * dt);
        verlet(&mut grad, &mut q, &mut p, &mut force, c1 * dt);
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { time: t_next, trajectory: Box::new(traj) });
        }
        if (i + 1) % stride == 0 || i + 1 == n {
            traj.push(t_next, [q.as_slice(), p.as_slice()].concat());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{SkewHermitianOperator, DEFAULT_ZERO_TOLERANCE};
    use nalgebra::DMatrix;

    #[test]
    fn rk4_exponential_decay() {
        let traj = rk4(|x, _| Ok(vec![-x[0]]), &[1.0], 0.01, 1.0, 1).unwrap();
        let (t, x) = traj.last().unwrap();
        assert_eq!(t, 1.0);
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-10);
        assert_eq!(traj.len(), 101);
    }

    #[test]
    fn rk4_lands_on_end_time() {
        let traj = rk4(|_, _| Ok(vec![1.0]), &[0.0], 0.3, 1.0, 1).unwrap();
        assert_eq!(traj.times.len(), 5);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert!((traj.states[4][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rk4_rejects_bad_step() {
        assert!(matches!(rk4(|x, _| Ok(x.to_vec()), &[1.0], 0.0, 1.0, 1), Err(Error::InvalidStep(_))));
        assert!(matches!(rk4(|x, _| Ok(x.to_vec()), &[1.0], -0.1, 1.0, 1), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn rk4_reports_blow_up() {
        let r = rk4(|x, _| Ok(vec![x[0] * x[0]]), &[1.0], 0.1, 10.0, 1);
        match r {
            Err(Error::NonFiniteState { trajectory, .. }) => assert!(!trajectory.is_empty()),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn rk4_stride_records() {
        let traj = rk4(|_, _| Ok(vec![0.0]), &[0.0], 0.1, 1.0, 5).unwrap();
        assert_eq!(traj.len(), 3);
    }

    #[test]
    fn rk4_final_matches_trajectory() {
        let traj = rk4(|x, _| Ok(vec![x[1], -x[0]]), &[1.0, 0.0], 0.05, 3.0, 10).unwrap();
        let x = rk4_final(|x: &[f64; 2], _| Ok([x[1], -x[0]]), [1.0, 0.0], 0.05, 3.0).unwrap();
        let (_, last) = traj.last().unwrap();
        for (a, b) in last.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn yoshida_sums_to_one() {
        let (c1, c0) = yoshida_coefficients();
        assert!((2.0 * c1 + c0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symplectic_harmonic_oscillator() {
        let traj = symplectic4(|q, f| f[0] = q[0], &[1.0], &[0.0], 0.01, 2.0 * std::f64::consts::PI, 1).unwrap();
        let (_, x) = traj.last().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-7, "{x:?}");
        assert!(x[1].abs() < 1e-7, "{x:?}");
    }

    #[test]
    fn splitting_exact_for_linear_part() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let op = SkewHermitianOperator::from_real(&m, DEFAULT_ZERO_TOLERANCE).unwrap();
        let sys = OscillatorySystem::new(op, 0.1, |_, _| vec![0.0, 0.0]);
        let traj = exp_symmetric2(&sys, &[1.0, 0.0], 0.7, 7.0, 1).unwrap();
        let (t, x) = traj.last().unwrap();
        assert!((x[0] - t.cos()).abs() < 1e-13);
        assert!((x[1] + t.sin()).abs() < 1e-13);
    }
}
