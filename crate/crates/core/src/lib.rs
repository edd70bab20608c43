//! Short-term wind speed forecasting for wind farm clusters.
//!
//! The crate implements an ensemble built from Legendre memory unit (LMU)
//! slices: a weighted mean filter denoises each site's series, Kendall rank
//! correlation over periodic time series yields compensation weights (CPK)
//! between sites, gaps are filled either from a site's own history (MAA) or
//! from CPK-weighted neighbor values (CCK), and a chain of residual slices
//! combines per-site predictors into a cluster-aware forecast.

pub mod cluster;
pub mod correlation;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod lmu;
pub mod preprocess;
pub mod rnn;
pub mod training;

pub use error::{Error, Result};
