//! Token-level decoding: truncation, conformative mixing of an instruct and
//! a base distribution, sampling and the generation loop.

mod generate;
pub mod live;
mod logprobs;
mod mix;
mod sampler;
mod truncation;

pub use generate::{
    generate_sequence, step_distribution, DecodeConfig, DistributionProvider, Generation, StepRecord, StopReason,
    TextCodec,
};
pub use live::{AdapterClient, AdapterModel, ModelRole};
pub use logprobs::{LogProbVector, ValidSet};
pub use mix::{conformative_mix, restrict_to_valid};
pub use sampler::sample_token;
pub use truncation::{truncate_nucleus, truncate_topk, Truncation};
