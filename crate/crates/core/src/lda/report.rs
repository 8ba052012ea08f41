use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::corpus::Dictionary;
use super::gibbs::LdaModel;
use super::LdaError;

pub const TOP_WORDS: usize = 10;
pub const STARRED_TOPICS: usize = 10;

/// θ_d: `(n_dk + α_k) / (n_d + Σα)`.
pub fn doc_topic_dist(model: &LdaModel, doc: usize) -> Result<Vec<f64>, LdaError> {
    if doc >= model.num_docs() {
        return Err(LdaError::DocIndex { index: doc, num_docs: model.num_docs() });
    }
    let denom = model.doc_len(doc) as f64 + model.alpha_sum();
    Ok(model.doc_topic_row(doc).iter().zip(&model.alpha).map(|(&n, a)| (f64::from(n) + a) / denom).collect())
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn dominant_topic(model: &LdaModel, doc: usize) -> Result<usize, LdaError> {
    doc_topic_dist(model, doc).map(|theta| argmax_lowest(&theta))
}

/// φ_k: `(n_kw + β) / (n_k + Vβ)` over the whole vocabulary.
pub fn topic_word_dist(model: &LdaModel, topic: usize) -> Vec<f64> {
    let denom = model.topic_totals[topic] as f64 + model.vocab_size as f64 * model.beta;
    (0..model.vocab_size).map(|w| (f64::from(model.topic_word(topic, w)) + model.beta) / denom).collect()
}

/// Per topic, the number of words with at least one token assigned to it.
/// Raw counts are used since the smoothed φ is never zero.
pub fn word_association_counts(model: &LdaModel) -> Vec<usize> {
    let k = model.num_topics;
    let mut counts = vec![0usize; k];
    for row in model.word_topic.chunks_exact(k) {
        for (t, &n) in row.iter().enumerate() {
            if n > 0 {
                counts[t] += 1;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportOrder {
    Descending,
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub top_words: Vec<(String, f64)>,
    /// Fraction of documents whose dominant topic this is.
    pub percent: f64,
    pub nonzero_word_count: usize,
    pub starred: bool,
}

fn top_words(model: &LdaModel, dict: &Dictionary, topic: usize, n: usize) -> Vec<(String, f64)> {
    let phi = topic_word_dist(model, topic);
    let mut ids: Vec<usize> = (0..model.vocab_size).collect();
    ids.sort_by(|&a, &b| model.topic_word(topic, b).cmp(&model.topic_word(topic, a)).then(a.cmp(&b)));
    ids.truncate(n);
    ids.into_iter().map(|w| (String::from(dict.token(w as u32)), phi[w])).collect()
}

/// Topics ranked by how many documents they dominate.
///
/// The descending order sorts by dominated-document count (ties by lower
/// topic id); the ascending order is its exact reverse, so the first `n` of
/// one and the first `K − n` of the other partition the topics. The
/// [`STARRED_TOPICS`] topics with the most non-zero word associations are
/// starred. A `count` above K returns all topics.
pub fn topic_prevalence_report(
    model: &LdaModel,
    dict: &Dictionary,
    order: ReportOrder,
    count: usize,
) -> Vec<TopicSummary> {
    let k = model.num_topics;
    let d = model.num_docs();
    let mut dominated = vec![0usize; k];
    for doc in 0..d {
        // doc < num_docs, so this cannot fail
        let t = dominant_topic(model, doc).unwrap_or(0);
        dominated[t] += 1;
    }

    let assoc = word_association_counts(model);
    let mut by_assoc: Vec<usize> = (0..k).collect();
    by_assoc.sort_by(|&a, &b| assoc[b].cmp(&assoc[a]).then(a.cmp(&b)));
    let starred: BTreeSet<usize> = by_assoc.into_iter().take(STARRED_TOPICS).collect();

    let mut ranked: Vec<usize> = (0..k).collect();
    ranked.sort_by(|&a, &b| dominated[b].cmp(&dominated[a]).then(a.cmp(&b)));
    if order == ReportOrder::Ascending {
        ranked.reverse();
    }
    ranked
        .into_iter()
        .take(count.min(k))
        .map(|t| TopicSummary {
            topic_id: t,
            top_words: top_words(model, dict, t, TOP_WORDS),
            percent: dominated[t] as f64 / d as f64,
            nonzero_word_count: assoc[t],
            starred: starred.contains(&t),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicOverlap {
    pub topic_a: usize,
    pub topic_b: usize,
    pub jaccard: f64,
}

/// Jaccard similarity of the top-`top_n` word sets of every topic pair,
/// used when comparing models trained with different K.
pub fn topic_overlap(model: &LdaModel, dict: &Dictionary, top_n: usize) -> Vec<TopicOverlap> {
    let sets: Vec<BTreeSet<String>> =
        (0..model.num_topics).map(|t| top_words(model, dict, t, top_n).into_iter().map(|(w, _)| w).collect()).collect();
    let mut out = Vec::new();
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let inter = sets[a].intersection(&sets[b]).count();
            let union = sets[a].union(&sets[b]).count();
            let jaccard = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
            out.push(TopicOverlap { topic_a: a, topic_b: b, jaccard });
        }
    }
    out
}
