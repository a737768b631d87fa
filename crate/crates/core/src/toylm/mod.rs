//! Word-level n-gram models standing in for a base/instruct pair, and the
//! synthetic text they are trained on.

pub mod corpus;
pub mod fixture;
mod model;
mod serialize;

pub use fixture::{fixture_dataset, fixture_models, training_documents, FixtureRecord, FixtureSpec};
pub use model::{NGramConfig, NGramLM, Sharpening, Vocab, BOS, EOS, SPECIAL_TOKENS, UNK};
pub use serialize::{load_ngram, read_ngram, save_ngram, write_ngram};
