use thiserror::Error;

/// Errors shared by all subsystems.
#[derive(Debug, Error)]
pub enum Error {
    /// Index outside a table or array bound.
    #[error("index {index} out of range [{min}, {max}]")]
    OutOfRange { index: u64, min: u64, max: u64 },

    /// A build request exceeds the configured memory budget.
    #[error("capacity: n_max {requested} exceeds memory budget {budget}")]
    Capacity { requested: u64, budget: u64 },

    /// An enumeration exceeds its term budget; callers should fall back to a
    /// cheaper mode (e.g. the gaussian surrogate).
    #[error("budget: {what} needs {needed} terms, cap is {cap}")]
    Budget {
        what: &'static str,
        needed: u64,
        cap: u64,
    },

    /// The certified FFT error bound is too large for the requested result.
    #[error("precision: certified bound {bound:e} exceeds {limit:e} relative to max entry")]
    Precision { bound: f64, limit: f64 },

    /// Not enough usable data points for a regression.
    #[error("degenerate: {0}")]
    Degenerate(&'static str),

    /// Invalid argument combination.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
