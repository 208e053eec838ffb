//! Asynchronous word-embedding training by divide, train and merge.
//!
//! A corpus is split into representative sub-corpora ([`sampler`]), an
//! independent skip-gram negative-sampling model is trained on each one
//! without any parameter synchronization ([`sgns`]), and the sub-models are
//! combined into a single consensus embedding ([`merge`]). The [`eval`]
//! module scores embeddings on similarity, categorization and analogy
//! benchmarks.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod merge;
pub mod sampler;
pub mod sgns;
mod util;

pub use corpus::{EncodedCorpus, SentenceStream, Vocabulary};
pub use error::{Error, Result};
pub use merge::{MergeConfig, MergeMethod, MergeReport};
pub use sampler::{SamplingPlan, Strategy, SubCorpusSpec};
pub use sgns::{EmbeddingModel, TrainConfig};
pub use util::write_atomic;
