//! Errors of candidate trajectories against a benchmark at shared output times.

use oscavg_core::integrators::Trajectory;

use crate::error::{HarnessError, Result};

/// Relative tolerance for two output times to count as the same.
pub const TIME_MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Norm {
    Euclidean,
    /// Euclidean norm divided by the square root of the length.
    Rms,
}

/// A named vector-valued function of the state.
pub struct Observable {
    pub name: String,
    pub norm: Norm,
    pub extract: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl Observable {
    pub fn new(name: impl Into<String>, norm: Norm, extract: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), norm, extract: Box::new(extract) }
    }

    /// Components `range` of the state.
    pub fn slice(name: impl Into<String>, range: std::ops::Range<usize>) -> Self {
        Self::new(name, Norm::Euclidean, move |x| x[range.clone()].to_vec())
    }

    /// The whole state in the RMS norm.
    pub fn rms(name: impl Into<String>) -> Self {
        Self::new(name, Norm::Rms, |x| x.to_vec())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    /// `errors[k][i]`: observable `k` at `times[i]`.
    pub errors: Vec<Vec<f64>>,
    /// Mean over shared times after the initial one.
    pub means: Vec<f64>,
}

impl ErrorReport {
    pub fn mean_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|k| self.means[k])
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_MATCH_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Index pairs of matching output times.
pub fn shared_times(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        if same_time(a[i], b[j]) {
            out.push((i, j));
            i += 1;
            j += 1;
        } else if a[i] < b[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn error_metrics(candidate: &Trajectory, benchmark: &Trajectory, observables: &[Observable]) -> Result<ErrorReport> {
    let pairs = shared_times(&candidate.times, &benchmark.times);
    if pairs.is_empty() {
        return Err(HarnessError::NoSharedTimes);
    }
    let mut report = ErrorReport {
        times: pairs.iter().map(|&(i, _)| candidate.times[i]).collect(),
        names: observables.iter().map(|o| o.name.clone()).collect(),
        errors: vec![Vec::with_capacity(pairs.len()); observables.len()],
        means: Vec::with_capacity(observables.len()),
    };
    for (k, obs) in observables.iter().enumerate() {
        for &(i, j) in &pairs {
            let a = (obs.extract)(&candidate.states[i]);
            let b = (obs.extract)(&benchmark.states[j]);
            let sq: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
            let e = match obs.norm {
                Norm::Euclidean => sq.sqrt(),
                Norm::Rms => (sq / a.len().max(1) as f64).sqrt(),
            };
            report.errors[k].push(e);
        }
        let skip = usize::from(report.times.len() > 1 && report.times[0] == 0.0);
        let tail = &report.errors[k][skip..];
        report.means.push(tail.iter().sum::<f64>() / tail.len() as f64);
    }
    Ok(report)
}

/// Half the peak-to-trough span of `f(state)` over the whole trajectory.
pub fn fluctuation_amplitude(traj: &Trajectory, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (lo, hi) = traj.states.iter().map(|s| f(s)).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    0.5 * (hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(times: &[f64], f: impl Fn(f64) -> Vec<f64>) -> Trajectory {
        let mut t = Trajectory::default();
        for &s in times {
            t.push(s, f(s));
        }
        t
    }

    #[test]
    fn identical_is_zero() {
        let a = traj(&[0.0, 1.0, 2.0], |t| vec![t, 2.0 * t]);
        let r = error_metrics(&a, &a, &[Observable::slice("all", 0..2)]).unwrap();
        assert!(r.errors[0].iter().all(|e| *e == 0.0));
        assert_eq!(r.means[0], 0.0);
    }

    #[test]
    fn constant_offset() {
        let a = traj(&[0.0, 0.5, 1.0, 1.5], |t| vec![t, 0.0]);
        let b = traj(&[0.0, 1.0 + 1e-12, 2.0], |t| vec![t + 0.25, 0.0]);
        let r = error_metrics(&a, &b, &[Observable::slice("x", 0..1), Observable::rms("rms")]).unwrap();
        assert_eq!(r.times.len(), 2);
        assert!((r.means[0] - 0.25).abs() < 1e-11);
        assert!((r.means[1] - 0.25 / 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn disjoint_times() {
        let a = traj(&[0.5, 1.5], |_| vec![0.0]);
        let b = traj(&[0.0, 1.0], |_| vec![0.0]);
        assert!(matches!(error_metrics(&a, &b, &[Observable::rms("x")]), Err(HarnessError::NoSharedTimes)));
    }
}
