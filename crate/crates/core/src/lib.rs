//! Natural indirect effect estimation robust to unmeasured confounding and
//! classical mediator measurement error.
//!
//! The crate provides
//!
//! - [`genius`]: the heteroskedasticity-identified (GENIUS) estimator of the
//!   mediator effect, the product-form indirect effect with delta-method and
//!   bootstrap inference, the interaction-extended moment system, and a test of
//!   the heteroskedasticity condition that identification rests on;
//! - [`mediation`]: the naive product-of-coefficients estimator, the oracle
//!   estimator that sees the latent confounders, and the plug-in risk-ratio
//!   indirect effect for discrete data;
//! - [`simulation`]: data-generating processes for four confounding structures
//!   and a Monte Carlo driver reporting bias, variance, MSE and coverage;
//! - [`io`]: CSV ingestion, report serialization and the command-line driver
//!   used by the `mediate` binary;
//! - [`stats`]: least squares, logistic regression, sandwich covariance and
//!   seeded random streams.
//!
//! ```
//! use genius_mediation::{genius, Dataset};
//!
//! let data = Dataset::new(
//!     vec![0.0, 1.0, 2.0, 4.0],
//!     vec![0.0, 1.0, 1.0, 3.0],
//!     vec![0.0, 0.0, 1.0, 1.0],
//! )?;
//! let est = genius::nie_genius(&data, 1.0, 0.0, genius::Inference::Delta, &Default::default())?;
//! assert!((est.theta_m - 1.0).abs() < 1e-12);
//! assert!((est.nie - 1.5).abs() < 1e-12);
//! # Ok::<(), genius_mediation::Error>(())
//! ```
//!
//! Runnable walkthroughs of each capability live in the `examples/` directory.

mod data;
mod error;

pub mod genius;
pub mod io;
pub mod mediation;
pub mod simulation;
pub mod stats;

pub use data::Dataset;
pub use error::{Error, Result};
