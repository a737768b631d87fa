//! Dataset ingestion, generation runs, evaluation and reporting for
//! output-diversity experiments.

pub mod config;
pub mod dataset;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod prompt;
pub mod report;
pub mod samples;
pub mod seeds;

pub use error::{HarnessError, Result};
