use thiserror::Error;

/// Errors surfaced by the solver and model layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("operator is not Hermitian (max deviation {dev:.3e}, tolerance {tol:.1e})")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("steady-state solve failed: {0}")]
    SteadyState(String),

    #[error("Liouvillian kernel is degenerate (second eigenvalue real part {lambda1:.3e}): multistable")]
    Multistable { lambda1: f64 },

    #[error("integration step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("period averaging did not converge within {periods} periods (residual {residual:.3e})")]
    NoConvergence { periods: usize, residual: f64 },

    #[error("degenerate dressing frame: emitter {emitter} has Omega = Delta = 0")]
    DegenerateFrame { emitter: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no feasible point: {0}")]
    Infeasible(String),

    #[error("detector confusion matrix is singular (|eta_e + eta_g - 1| = {det:.3e}): eta_e = 1 - eta_g")]
    SingularDetector { det: f64 },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("population below threshold, correlation undefined: {0}")]
    VanishingPopulation(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
