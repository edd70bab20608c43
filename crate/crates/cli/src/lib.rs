//! Command-line pipeline for cluster wind-speed forecasting.
//!
//! The library side exposes the pieces the binary wires together — data
//! ingestion, the synthetic-cluster generator, the experiment pipeline, and
//! the command implementations — so integration tests can drive full
//! experiments in-process.

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod model_store;
pub mod pipeline;
pub mod plot;
pub mod synth;

pub use cli::Cli;
pub use commands::run;
