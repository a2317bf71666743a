//! Mean estimation and K-means clustering under a hybrid differential-privacy
//! trust model: an opt-in fraction of users report through a trusted curator
//! while the rest privatize their own reports locally, and the curator blends
//! the two groups into a single estimate.
//!
//! The crate is organized as:
//!
//! - [`core`]: shared domain types (group moments, cohort split, privacy
//!   parameters, mixture view).
//! - [`mechanisms`]: Laplace and Gaussian noise calibration and sampling,
//!   plus the closed-form density of a sum of independent Laplace variables.
//! - [`estimators`]: the estimators themselves, operating on sample arrays.
//! - [`analytics`]: exact closed-form mean-squared-error expressions, optimal
//!   and heuristic hybrid weights, critical values, relative improvement, and
//!   the dominance region of the privacy-weighted hybrid.
//! - [`amplification`]: the amplified privacy guarantee the joint hybrid
//!   noise provides against adversaries who see the released estimate, and
//!   the matching negative certificate for the Laplace mechanism.
//! - [`hybrid_kmeans`]: a K-means built from per-cluster hybrid estimates.
//! - [`experiments`]: distribution presets, CSV ingestion, a Monte Carlo
//!   harness that validates the closed forms, parameter sweeps, and CSV
//!   output helpers.
//! - [`rng`]: deterministic stream derivation for reproducible experiments.

pub mod amplification;
pub mod analytics;
pub mod core;
mod error;
pub mod estimators;
pub mod experiments;
pub mod hybrid_kmeans;
pub mod mechanisms;
pub mod rng;

pub use error::{Error, Result};
