use thiserror::Error;

/// Errors raised by grids, fields, solvers and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("memory budget exceeded: {requested} points requested, budget is {budget}")]
    Budget { requested: u128, budget: u128 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("spectral derivative requested along non-periodic axis {0}")]
    NonPeriodicAxis(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("gauge is not splitting-compatible; use the rk4 scheme")]
    NonSplittingGauge,

    #[error("time step {dt} exceeds the stability budget {budget}")]
    Stability { dt: f64, budget: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("energy blow-up at t = {time}: E = {energy:e}, E(0) = {initial:e}")]
    EnergyBlowUp {
        time: f64,
        energy: f64,
        initial: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("mass left the momentum window: {0:e}")]
    OutOfBand(f64),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("invariant monitor failed: {0}")]
    Monitor(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 validation, 3 numerical failure, 4 budget, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Budget { .. } => 4,
            Error::NotConverged { .. }
            | Error::EnergyBlowUp { .. }
            | Error::Numerical(_)
            | Error::OutOfBand(_)
            | Error::Monitor(_) => 3,
            Error::Io(_) | Error::Csv(_) => 1,
            Error::InvalidGrid(_)
            | Error::GridMismatch
            | Error::NonPeriodicAxis(_)
            | Error::InvalidState(_)
            | Error::InvalidField(_)
            | Error::Config(_)
            | Error::NonSplittingGauge
            | Error::Stability { .. }
            | Error::Validation(_)
            | Error::Format(_)
            | Error::Json(_) => 2,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::Budget { .. } => "budget",
            Error::GridMismatch => "grid_mismatch",
            Error::NonPeriodicAxis(_) => "non_periodic_axis",
            Error::InvalidState(_) => "invalid_state",
            Error::InvalidField(_) => "invalid_field",
            Error::Config(_) => "config",
            Error::NonSplittingGauge => "non_splitting_gauge",
            Error::Stability { .. } => "stability",
            Error::NotConverged { .. } => "not_converged",
            Error::EnergyBlowUp { .. } => "energy_blow_up",
            Error::Numerical(_) => "numerical",
            Error::OutOfBand(_) => "out_of_band",
            Error::Validation(_) => "validation",
            Error::Monitor(_) => "monitor",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
