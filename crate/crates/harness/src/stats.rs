//! Steady-state amplitude and mean over a trailing window.

use oscavg_core::integrators::Trajectory;

use crate::error::{HarnessError, Result};

/// Default trailing window.
pub const DEFAULT_WINDOW: f64 = 0.2;

/// Minimum number of oscillation periods the window must cover.
pub const MIN_PERIODS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyState {
    /// Half the peak-to-trough span.
    pub amplitude: f64,
    /// Time-weighted mean over the window.
    pub mean: f64,
    /// Periods covered, counted from mean crossings.
    pub periods: f64,
}

/// Amplitude and mean of one component over the trailing `window` fraction of the run.
pub fn steady_state_stats(traj: &Trajectory, component: usize, window: f64) -> Result<SteadyState> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(HarnessError::Config(format!("window must lie in (0, 1], got {window}")));
    }
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(HarnessError::WindowTooShort { periods: 0.0 });
    };
    let start = t1 - window * (t1 - t0);
    let first = traj.times.partition_point(|&t| t < start);
    let times = &traj.times[first..];
    let values: Vec<f64> = traj.states[first..]
        .iter()
        .map(|s| {
            s.get(component)
                .copied()
                .ok_or_else(|| HarnessError::Config(format!("component {component} out of range")))
        })
        .collect::<Result<_>>()?;
    if values.len() < 3 {
        return Err(HarnessError::WindowTooShort { periods: 0.0 });
    }
    let span = times[times.len() - 1] - times[0];
    let mut integral = 0.0;
    for i in 1..values.len() {
        integral += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    let mean = integral / span;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v - mean), hi.max(v - mean)));
    let crossings = values.windows(2).filter(|w| (w[0] - mean) * (w[1] - mean) < 0.0).count();
    let periods = crossings as f64 / 2.0;
    if periods < MIN_PERIODS {
        return Err(HarnessError::WindowTooShort { periods });
    }
    Ok(SteadyState { amplitude: 0.5 * (hi - lo), mean, periods })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> Trajectory {
        let mut traj = Trajectory::default();
        for i in 0..=n {
            let t = t_end * i as f64 / n as f64;
            traj.push(t, vec![f(t)]);
        }
        traj
    }

    #[test]
    fn pure_cosine() {
        let traj = sampled(f64::cos, 100.0 * std::f64::consts::TAU, 200_000);
        let s = steady_state_stats(&traj, 0, 1.0).unwrap();
        assert!((s.amplitude - 1.0).abs() < 1e-6);
        assert!(s.mean.abs() < 1e-6);
    }

    #[test]
    fn offset_cosine() {
        let traj = sampled(|t| 0.5 + t.cos(), 100.0 * std::f64::consts::TAU, 200_000);
        let s = steady_state_stats(&traj, 0, 0.2).unwrap();
        assert!((s.amplitude - 1.0).abs() < 1e-6);
        assert!((s.mean - 0.5).abs() < 1e-6);
        assert!(s.periods >= 19.0);
    }

    #[test]
    fn short_window_rejected() {
        let traj = sampled(f64::cos, 20.0, 2000);
        assert!(matches!(steady_state_stats(&traj, 0, 0.2), Err(HarnessError::WindowTooShort { .. })));
        assert!(steady_state_stats(&traj, 0, 0.0).is_err());
    }
}
