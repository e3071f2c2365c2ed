//! Catalog files, configuration, the Monte Carlo engine and the `meppm`
//! command-line front end, built on `meppm-core`.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod report;

pub use config::Config;
pub use error::AppError;
