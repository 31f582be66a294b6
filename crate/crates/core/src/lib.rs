//! Merge-probability driven prioritization of code review requests.
//!
//! A discrete Bayesian network estimates how likely each open change is to be
//! merged; the prioritizer then orders a reviewer's queue by merge conflict,
//! change type and that probability.

pub mod bn;
pub mod config;
pub mod etl;
pub mod eval;
pub mod factors;
pub mod pipeline;
pub mod prioritizer;
pub mod synthgen;

pub use bn::{
    deserialize_model, infer_merge_probability, joint_probability, learn_cpts, serialize_model,
    Assignment, BayesNet, Evidence, NetworkStructure, TrainedModel,
};
pub use config::Config;
pub use etl::{BinThresholds, Observation, RawChange};
pub use eval::{cross_validate, EvalReport};
pub use factors::{ChangeType, FactorVector, MergeConflict, Outcome};
pub use pipeline::{rank_observations, train_model, TrainError};
pub use prioritizer::{prioritize, PrioritizedItem, ReviewItem};
