//! Evaluation harness: RMSE/MAE, seeded k-fold cross-validation and ROC/AUC
//! on pooled out-of-fold predictions.

mod cv;
mod metrics;
mod roc;

use thiserror::Error;

pub use cv::{cross_validate, kfold_split, EvalReport, FoldMetrics, DEFAULT_FOLDS};
pub use metrics::{mae, rmse};
pub use roc::{roc_auc, rounded_confusion, Confusion, RocCurve, RocPoint};

use crate::bn::InferenceError;
use crate::pipeline::TrainError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("predicted has {predicted} values but actual has {actual}")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("metrics need at least one value")]
    Empty,
    #[error("ROC needs both classes among the labels")]
    SingleClass,
    #[error("cannot split {n} rows into {k} folds (need 2 <= k <= n)")]
    InvalidFolds { n: usize, k: usize },
    #[error("row `{0}` has no outcome; cross-validation needs closed changes only")]
    OpenRow(String),
    #[error("fold {fold}: {source}")]
    Train {
        fold: usize,
        #[source]
        source: TrainError,
    },
    #[error(transparent)]
    Inference(#[from] InferenceError),
}
