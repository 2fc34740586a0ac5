//! Next-utterance classification: negative sampling, a reference logistic
//! classifier, and pointwise Jensen-Shannon divergence estimates.

mod dataset;
mod estimate;
mod features;
mod score;
pub mod synthetic;
mod train;

pub use dataset::{
    build_nuc_dataset, read_nuc_dataset, sample_negatives, split_holdout, write_nuc_dataset, NucExample,
};
pub use estimate::{pjsd_estimate, PJsdEstimate, PROB_CLAMP};
pub use features::{FeatureSchema, FeatureVector, Featurizer, DEFAULT_SCHEMA_ID};
pub use score::{predict, score_corpus_pjsd};
pub use train::{
    accuracy, balanced_cross_entropy, fit, objective_and_gradient, train_reference_classifier, ClassifierParams,
    EpochStats, Objective, TrainHyper, TrainOutcome, TrainingMetadata, TrainingSet,
};
