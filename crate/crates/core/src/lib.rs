//! Correlation-based NOMA: per-realization minimal power, closed-form average
//! power bounds, large-array limits and a reproducible Monte Carlo harness.
//!
//! All powers and gains are linear. Thresholds are handled squared
//! (`ρ_th²`) throughout; [`SystemParams::with_rho_th`] accepts the unsquared
//! value.

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod noma;
pub mod quadrature;
pub mod special;

pub use channel::{ChannelStats, SystemParams};
pub use error::{Error, Result};
