//! Conformative decoding, text-diversity metrics and a surrogate
//! base/instruct n-gram language-model pair.

pub mod decoding;
pub mod error;
pub mod features;
pub mod metrics;
pub mod numerics;
pub mod toylm;

pub use error::{Error, Result};
