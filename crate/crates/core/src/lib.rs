//! Class association rules as explanations for an external classifier's
//! predictions: discretize, mine, prune, curate, explain, evaluate.

pub mod canonical;
pub mod curation;
pub mod data;
pub mod discretize;
pub mod error;
pub mod evaluator;
pub mod explainer;
pub mod miner;
pub mod pruner;
pub mod synth;

pub use error::{Error, Result};
