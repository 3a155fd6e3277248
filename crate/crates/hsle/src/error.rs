use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series did not converge within {terms} terms (z = {z})")]
    NonConvergent { z: f64, terms: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("adaptive step {dt:e} fell below the floor {dt_min:e} at t = {t}")]
    StepSizeUnderflow { t: f64, dt: f64, dt_min: f64 },

    #[error("marked point {what} was swallowed at step {step}")]
    Swallowed { what: String, step: usize },

    #[error("state space of size 2^{bits} exceeds the enumeration cap of {cap} states")]
    TooLarge { bits: usize, cap: usize },

    #[error("no interface: {0}")]
    NoInterface(String),

    #[error("inconsistent configuration: {0}")]
    InconsistentConfig(String),

    #[error("solver failure: residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("rejection budget of {budget} exhausted (acceptance rate < {rate_bound:e})")]
    BudgetExhausted { budget: usize, rate_bound: f64 },

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("experiment `{id}`: {source}")]
    Experiment {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
