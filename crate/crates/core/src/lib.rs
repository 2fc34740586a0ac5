//! Conversational uptake measurement: pair extraction, similarity metrics,
//! next-utterance classification and the statistics used to validate them.

pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod nuc;
pub mod scalar;
pub mod seeds;
pub mod selftest;
pub mod similarity;
pub mod stats;
pub mod textprep;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use similarity::ScoreTable;

pub type WordVectors = embeddings::WordVectorStore<f64>;
pub type SentenceVectors = embeddings::SentenceVectorStore<f64>;
pub type Classifier = nuc::ClassifierParams<f64>;
