//! Extract-transform-load: Gerrit wire mapping, factor computation,
//! change-type classification, tercile binning and the dataset store.
//!
//! The HTTP side of extraction lives in the service crate; everything here is
//! pure or file-local.

pub mod bins;
pub mod classify;
pub mod gerrit;
pub mod raw;
pub mod store;
pub mod transform;

pub use bins::{discretize, fit_bins, fit_bins_on, BinError, BinThresholds, Cuts};
pub use classify::{classify_change_type, default_rules, KeywordRule};
pub use gerrit::{encode_changes_body, extract_raw_changes, parse_changes_body, ChangeInfo, WireError};
pub use raw::{ChangeStatus, RawChange};
pub use store::{load_dataset, store_dataset, DatasetStore, FileStore, MemoryStore, StoreError};
pub use transform::{
    compute_raw_factors, observe, observe_for_dataset, AgeEndpoint, Observation, RawFactors,
    TransformError,
};
