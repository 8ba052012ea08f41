//! Bag-of-words corpus construction and LDA topic modeling by collapsed
//! Gibbs sampling with periodic re-fitting of an asymmetric document–topic
//! prior.

mod alpha;
mod corpus;
mod gibbs;
mod report;

pub use alpha::{fit_alpha, optimize_alpha, AlphaFit, ALPHA_FLOOR, ALPHA_MAX_STEPS, ALPHA_TOLERANCE};
pub use corpus::{build_corpus, BowCorpus, BowDoc, CorpusBuild, Dictionary};
pub use gibbs::{train, train_with, GibbsSampler, LdaModel, LdaParams};
pub use report::{
    argmax_lowest, doc_topic_dist, dominant_topic, topic_overlap, topic_prevalence_report, topic_word_dist,
    word_association_counts, ReportOrder, TopicOverlap, TopicSummary, STARRED_TOPICS, TOP_WORDS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LdaError {
    #[error("corpus is empty after pruning")]
    EmptyCorpus,
    #[error("number of topics must be at least 1")]
    ZeroTopics,
    #[error("priors must be positive and finite (alpha0={alpha0}, beta={beta})")]
    NonPositivePrior { alpha0: f64, beta: f64 },
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("document index {index} out of range for {num_docs} documents")]
    DocIndex { index: usize, num_docs: usize },
    #[error("alpha has {got} components, expected {expected}")]
    AlphaLength { got: usize, expected: usize },
    #[error("topic assignment {topic} out of range for {num_topics} topics")]
    TopicOutOfRange { topic: u32, num_topics: usize },
    #[error("assignments do not match corpus shape")]
    AssignmentShape,
    #[error("alpha optimization needs at least one completed sampling iteration")]
    NotSampled,
    #[error("non-finite value during alpha optimization")]
    NonFiniteAlpha,
}
