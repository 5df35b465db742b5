use crate::averaging::SamplingPlan;
use crate::integrators::Trajectory;

/// Errors raised anywhere in the averaging stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not skew-Hermitian (defect {defect:.3e})")]
    NotSkewHermitian { defect: f64 },
    #[error("eigenbasis is not unitary (defect {defect:.3e})")]
    SingularEigenbasis { defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("flow of a real state left an imaginary residue of {residue:.3e}")]
    ComplexResidue { residue: f64 },
    #[error("sampling plan has the wrong mode for {0}")]
    WrongPlanMode(&'static str),
    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),
    #[error("sample budget exhausted at N = {} (residual {achieved:.3e})", plan.samples)]
    BudgetExceeded { achieved: f64, plan: SamplingPlan },
    #[error("state became non-finite at t = {time}")]
    NonFiniteState { time: f64, trajectory: Box<Trajectory> },
    #[error("invalid step size {0}")]
    InvalidStep(f64),
    #[error("plate contact: displacement {y} reached the gap {gap}")]
    PlateContact { y: f64, gap: f64 },
    #[error("averaged field is singular at zero response radius")]
    RadiusZero,
    #[error("Newton iteration did not converge (residual {residual:.3e} after {iterations} steps)")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("Jacobian is singular")]
    SingularJacobian,
    #[error("no real solution: {0}")]
    NoRealSolution(String),
    #[error("parameter `{0}` must be positive")]
    NonPositiveParameter(&'static str),
    #[error("expected a state of dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("fields live on different grids")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
