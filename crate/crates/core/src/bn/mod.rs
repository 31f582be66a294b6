//! Discrete Bayesian network: structure, CPTs, smoothed learning and exact
//! inference of the merge probability.

pub mod artifact;
pub mod cpt;
pub mod error;
pub mod infer;
pub mod learn;
pub mod model;
pub mod structure;

pub use artifact::{deserialize_model, serialize_model, ArtifactError, FORMAT_VERSION};
pub use cpt::{Cpt, ROW_SUM_TOLERANCE};
pub use error::{CptError, InferenceError, LearnError, ModelError, StructureError};
pub use infer::{infer_merge_probability, joint_probability};
pub use learn::{fit_encoded, fit_network, learn_cpts, TrainingMeta};
pub use model::{Assignment, BayesNet, Evidence, TrainedModel};
pub use structure::{CategoricalVariable, NetworkStructure, TERMINAL};
