//! Numerical laboratory for randomized Goldbach-type Dirichlet series.
//!
//! The library is organized around five subsystems:
//!
//! * [`mangoldt`] — sieve-backed von Mangoldt table `Λ(n)` and primality data;
//! * [`convolution`] — the deterministic coefficient arrays `G_r(n)` and
//!   `W_r(n)` via direct enumeration and FFT-accelerated r-fold additive
//!   convolution;
//! * [`ensemble`] — counter-based Rademacher signs, sampled signed coefficient
//!   paths `Y_r(n,ω)` and exact finite sign-flip distributions;
//! * [`dirichlet`] — partial sums of the random Dirichlet series, the variance
//!   series, unit truncation and convergence-abscissa estimation;
//! * [`goldbach`] — prime-pair counts, the Hardy–Littlewood singular series
//!   and the σ = 1 divergence diagnostic.
//!
//! Everything is deterministic given a [`ensemble::SeedSpec`]; there is no
//! hidden random state anywhere in the crate.

pub mod convolution;
pub mod dirichlet;
pub mod ensemble;
mod error;
pub mod goldbach;
pub mod mangoldt;
pub mod sum;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
