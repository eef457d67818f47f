use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic speeds must satisfy a- < 0 < a+ (got a+ = {a_plus}, a- = {a_minus})")]
    NotStrictlyHyperbolic { a_plus: f64, a_minus: f64 },

    #[error("steady state is not sub-sonic: |q*/rho*| = {velocity} >= a = {sound_speed}")]
    NotSubsonic { velocity: f64, sound_speed: f64 },

    #[error("steady state is not sub-critical: |q*/h*| = {velocity} >= sqrt(g h*) = {wave_speed}")]
    NotSubcritical { velocity: f64, wave_speed: f64 },

    #[error("invalid steady state: {0}")]
    InvalidSteadyState(String),

    #[error("CFL number {0} violates the CFL condition 0 < max(a+, |a-|) dt/dx <= 1")]
    Cfl(f64),

    #[error("need at least {min} cells, got {got}")]
    TooFewCells { min: usize, got: usize },

    #[error("Lyapunov weight parameter mu must be positive and finite, got {0}")]
    InvalidMu(f64),

    #[error("unknown model '{0}' (expected wave | euler | saint-venant)")]
    UnknownModel(String),

    #[error("boundary closure failed: gradient system is singular (det K = {det:e})")]
    SingularClosure { det: f64 },

    #[error("Lyapunov functional diverged at step {step}: {value:e} > 1e6 x {initial:e}")]
    Divergence {
        step: usize,
        value: f64,
        initial: f64,
    },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("refinement study needs each J to double the previous one, got {0:?}")]
    NonDyadic(Vec<usize>),

    #[error("time grids are misaligned: coarse t = {coarse}, fine t = {fine}")]
    MisalignedTimes { coarse: f64, fine: f64 },

    #[error("unknown table {0} (expected 1..=4)")]
    UnknownTable(u32),

    #[error("{location}: `{text}`: {reason}")]
    Config {
        location: String,
        text: String,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularClosure { .. }
                | Error::Divergence { .. }
                | Error::LengthMismatch { .. }
                | Error::MisalignedTimes { .. }
        )
    }
}
