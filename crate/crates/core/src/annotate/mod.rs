//! Two-annotator labeling sessions, Cohen's kappa and cluster-weighted
//! label shares.

mod estimate;
mod kappa;
mod session;

pub use estimate::{weighted_estimate, CategoryEstimate, LabelShare};
pub use kappa::{kappa_from_confusion, KappaResult};
pub use session::{
    AnnotationSession, AnnotatorView, DisagreementItem, FinalLabelRow, ItemView, LabelSet, SampleItem, SessionEvent,
    SessionStatus,
};

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotateError {
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("exactly two annotators are required, got {0}")]
    AnnotatorCount(usize),
    #[error("annotator ids must differ")]
    SameAnnotator,
    #[error("sample is empty")]
    EmptySample,
    #[error("tweet {0} appears more than once in the sample")]
    DuplicateTweet(String),
    #[error("cluster ratios are invalid: {0}")]
    BadClusterRatios(String),
    #[error("cluster {0} has weight but no sampled tweets")]
    UnsampledCluster(u32),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("tweet {0} is not in the sample")]
    UnknownTweet(String),
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("session is {actual}, expected {expected}")]
    WrongState { expected: SessionStatus, actual: SessionStatus },
    #[error("labeling incomplete: {}", fmt_missing(.0))]
    LabelingIncomplete(Vec<(String, usize)>),
    #[error("tweet {0} is not awaiting adjudication")]
    NotDisagreed(String),
    #[error("no tweet is labeled by both annotators")]
    NoSharedItems,
    #[error("session log must start with a create event")]
    MissingCreate,
    #[error("session log has a second create event")]
    DuplicateCreate,
}

fn fmt_missing(missing: &[(String, usize)]) -> String {
    let parts: Vec<String> = missing.iter().map(|(a, n)| alloc::format!("{a} missing {n}")).collect();
    parts.join(", ")
}
