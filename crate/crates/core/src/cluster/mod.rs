//! TF-IDF vectorization, mini-batch k-means, elbow-based choice of k and
//! stratified sampling of clusters for annotation.

mod elbow;
mod kmeans;
mod sample;
mod sparse;
mod tfidf;

pub use elbow::{elbow_select, seed_for_k, ElbowCurve, ElbowWarning, MONOTONE_TOLERANCE};
pub use kmeans::{cluster_ratios, minibatch_kmeans, ClusterModel, KMeansParams};
pub use sample::stratified_sample;
pub use sparse::SparseMatrix;
pub use tfidf::{tfidf_fit_transform, TfIdfModel, TfIdfOutput};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("no documents to vectorize")]
    NoDocuments,
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of rows ({rows})")]
    TooManyClusters { k: usize, rows: usize },
    #[error("elbow search needs at least 3 ascending candidates")]
    BadCandidates,
    #[error("per-cluster sample size must be at least 1")]
    ZeroSampleSize,
    #[error("{ids} ids but {labels} labels")]
    LengthMismatch { ids: usize, labels: usize },
}
