//! Spatio-temporal analysis and prediction of point-event risk on uniform grids.
//!
//! The pipeline: parse raw event records ([`ingest`]), or simulate them
//! ([`synth`]); discretize onto a (row, col, hour) count cube; analyze spatial
//! and temporal correlation structure ([`patterns`]); derive a frequency-based
//! risk target and supervised sequence samples ([`risk`]); train a stacked-LSTM
//! regressor ([`nn`]) and classical baselines ([`baselines`]); evaluate with
//! MAE/MSE/RMSE and export risk maps ([`eval`]).
//!
//! Everything is deterministic under a fixed seed: simulation, weight
//! initialization, shuffling, and dropout all draw from explicitly seeded
//! generators, and binary/CSV writers are byte-stable.

pub mod baselines;
pub mod checkpoint;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod patterns;
pub mod risk;
pub mod rng;
pub mod synth;

mod binio;
mod pgm;

pub use error::Error;
pub use ingest::{AccidentRecord, CountCube, GridSpec};
pub use risk::{DataSplit, RiskCube, RiskSample, SampleStore};
pub use rng::SeededRng;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
