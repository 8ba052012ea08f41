use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::estimate::{weighted_estimate, CategoryEstimate};
use super::kappa::{kappa_from_confusion, KappaResult};
use super::AnnotateError;

const DEFAULT_LABELS: [&str; 6] = ["opinion", "news/quotes", "satire/jokes", "complaint/blame", "solution", "neutral"];

/// Ordered, duplicate-free set of category names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> Result<Self, AnnotateError> {
        if labels.is_empty() {
            return Err(AnnotateError::EmptyLabelSet);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(AnnotateError::DuplicateLabel(l.clone()));
            }
        }
        Ok(LabelSet { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet { labels: DEFAULT_LABELS.iter().map(|s| s.to_string()).collect() }
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = AnnotateError;
    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        LabelSet::new(v)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(s: LabelSet) -> Self {
        s.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Labeling,
    Adjudicating,
    Closed,
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionStatus::Labeling => "labeling",
            SessionStatus::Adjudicating => "adjudicating",
            SessionStatus::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleItem {
    pub tweet_id: String,
    pub cluster_id: u32,
    pub text: String,
}

/// What one annotator may see: their own progress and label, never the
/// other annotator's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorView {
    pub session_id: String,
    pub annotator: String,
    pub phase: SessionStatus,
    pub labeled: usize,
    pub total: usize,
    pub labels: Vec<String>,
    pub current: Option<ItemView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemView {
    pub tweet_id: String,
    pub cluster_id: u32,
    pub text: String,
}

/// A tweet the annotators labeled differently. The two labels are sorted,
/// so the pair carries no attribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementItem {
    pub tweet_id: String,
    pub cluster_id: u32,
    pub text: String,
    pub candidate_labels: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalLabelRow {
    pub tweet_id: String,
    pub cluster_id: u32,
    pub annotator_a_label: Option<String>,
    pub annotator_b_label: Option<String>,
    pub final_label: Option<String>,
}

/// One entry of a session's append-only log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    Create {
        session_id: String,
        annotators: Vec<String>,
        label_set: LabelSet,
        items: Vec<SampleItem>,
        cluster_ratios: Vec<f64>,
    },
    Label {
        annotator: String,
        tweet_id: String,
        label: String,
    },
    OpenAdjudication,
    Adjudicate {
        tweet_id: String,
        label: String,
    },
}

/// Numeric ids compare numerically when they have no leading zeros.
fn id_order(a: &str, b: &str) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSession {
    session_id: String,
    annotators: [String; 2],
    label_set: LabelSet,
    /// Sorted by (cluster, tweet id).
    items: Vec<SampleItem>,
    index: BTreeMap<String, usize>,
    cluster_ratios: Vec<f64>,
    labels: [BTreeMap<usize, usize>; 2],
    adjudicated: BTreeMap<usize, usize>,
    disagreed: BTreeSet<usize>,
    status: SessionStatus,
}

impl AnnotationSession {
    pub fn create(
        session_id: &str,
        annotators: Vec<String>,
        label_set: LabelSet,
        items: Vec<SampleItem>,
        cluster_ratios: Vec<f64>,
    ) -> Result<Self, AnnotateError> {
        let annotators: [String; 2] =
            annotators.try_into().map_err(|v: Vec<String>| AnnotateError::AnnotatorCount(v.len()))?;
        if annotators[0] == annotators[1] {
            return Err(AnnotateError::SameAnnotator);
        }
        if items.is_empty() {
            return Err(AnnotateError::EmptySample);
        }
        let mut items = items;
        items.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id).then_with(|| id_order(&a.tweet_id, &b.tweet_id)));
        let mut index = BTreeMap::new();
        for (i, item) in items.iter().enumerate() {
            if index.insert(item.tweet_id.clone(), i).is_some() {
                return Err(AnnotateError::DuplicateTweet(item.tweet_id.clone()));
            }
        }
        check_ratios(&cluster_ratios, &items)?;
        Ok(AnnotationSession {
            session_id: session_id.to_string(),
            annotators,
            label_set,
            items,
            index,
            cluster_ratios,
            labels: [BTreeMap::new(), BTreeMap::new()],
            adjudicated: BTreeMap::new(),
            disagreed: BTreeSet::new(),
            status: SessionStatus::Labeling,
        })
    }

    /// Rebuilds a session from its log.
    pub fn replay<'a>(events: impl IntoIterator<Item = &'a SessionEvent>) -> Result<Self, AnnotateError> {
        let mut events = events.into_iter();
        let mut session = match events.next() {
            Some(SessionEvent::Create { session_id, annotators, label_set, items, cluster_ratios }) => {
                Self::create(session_id, annotators.clone(), label_set.clone(), items.clone(), cluster_ratios.clone())?
            }
            _ => return Err(AnnotateError::MissingCreate),
        };
        for e in events {
            session.apply(e)?;
        }
        Ok(session)
    }

    pub fn apply(&mut self, event: &SessionEvent) -> Result<(), AnnotateError> {
        match event {
            SessionEvent::Create { .. } => Err(AnnotateError::DuplicateCreate),
            SessionEvent::Label { annotator, tweet_id, label } => self.submit_label(annotator, tweet_id, label),
            SessionEvent::OpenAdjudication => self.open_adjudication().map(|_| ()),
            SessionEvent::Adjudicate { tweet_id, label } => self.adjudicate(tweet_id, label),
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn annotators(&self) -> &[String; 2] {
        &self.annotators
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn items(&self) -> &[SampleItem] {
        &self.items
    }

    pub fn cluster_ratios(&self) -> &[f64] {
        &self.cluster_ratios
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    /// Sampled tweet ids grouped by cluster.
    pub fn sample(&self) -> BTreeMap<u32, Vec<&str>> {
        let mut out: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for item in &self.items {
            out.entry(item.cluster_id).or_default().push(&item.tweet_id);
        }
        out
    }

    fn annotator_slot(&self, annotator: &str) -> Result<usize, AnnotateError> {
        self.annotators
            .iter()
            .position(|a| a == annotator)
            .ok_or_else(|| AnnotateError::UnknownAnnotator(annotator.to_string()))
    }

    fn item_index(&self, tweet_id: &str) -> Result<usize, AnnotateError> {
        self.index.get(tweet_id).copied().ok_or_else(|| AnnotateError::UnknownTweet(tweet_id.to_string()))
    }

    fn label_index(&self, label: &str) -> Result<usize, AnnotateError> {
        self.label_set.index(label).ok_or_else(|| AnnotateError::UnknownLabel(label.to_string()))
    }

    fn expect(&self, expected: SessionStatus) -> Result<(), AnnotateError> {
        if self.status == expected {
            Ok(())
        } else {
            Err(AnnotateError::WrongState { expected, actual: self.status })
        }
    }

    /// Records or overwrites an annotator's label.
    pub fn submit_label(&mut self, annotator: &str, tweet_id: &str, label: &str) -> Result<(), AnnotateError> {
        self.expect(SessionStatus::Labeling)?;
        let slot = self.annotator_slot(annotator)?;
        let item = self.item_index(tweet_id)?;
        let label = self.label_index(label)?;
        self.labels[slot].insert(item, label);
        Ok(())
    }

    pub fn own_label(&self, annotator: &str, tweet_id: &str) -> Result<Option<&str>, AnnotateError> {
        let slot = self.annotator_slot(annotator)?;
        let item = self.item_index(tweet_id)?;
        Ok(self.labels[slot].get(&item).map(|&l| self.label_set.labels()[l].as_str()))
    }

    /// Progress and the first item this annotator has not labeled yet.
    pub fn annotator_view(&self, annotator: &str) -> Result<AnnotatorView, AnnotateError> {
        let slot = self.annotator_slot(annotator)?;
        let mine = &self.labels[slot];
        let current = if self.status == SessionStatus::Labeling {
            (0..self.items.len()).find(|i| !mine.contains_key(i)).map(|i| {
                let item = &self.items[i];
                ItemView { tweet_id: item.tweet_id.clone(), cluster_id: item.cluster_id, text: item.text.clone() }
            })
        } else {
            None
        };
        Ok(AnnotatorView {
            session_id: self.session_id.clone(),
            annotator: annotator.to_string(),
            phase: self.status,
            labeled: mine.len(),
            total: self.items.len(),
            labels: self.label_set.labels().to_vec(),
            current,
        })
    }

    /// Unlabeled item counts per annotator, omitting annotators who are done.
    pub fn missing_counts(&self) -> Vec<(String, usize)> {
        self.annotators
            .iter()
            .zip(&self.labels)
            .filter(|(_, l)| l.len() < self.items.len())
            .map(|(a, l)| (a.clone(), self.items.len() - l.len()))
            .collect()
    }

    /// Ends labeling. Agreed tweets take their common label; the rest wait
    /// for adjudication. Closes at once when nothing is disputed.
    pub fn open_adjudication(&mut self) -> Result<Vec<DisagreementItem>, AnnotateError> {
        self.expect(SessionStatus::Labeling)?;
        let missing = self.missing_counts();
        if !missing.is_empty() {
            return Err(AnnotateError::LabelingIncomplete(missing));
        }
        for i in 0..self.items.len() {
            let (a, b) = (self.labels[0][&i], self.labels[1][&i]);
            if a == b {
                self.adjudicated.insert(i, a);
            } else {
                self.disagreed.insert(i);
            }
        }
        self.status = if self.disagreed.is_empty() { SessionStatus::Closed } else { SessionStatus::Adjudicating };
        self.disagreement_queue()
    }

    /// Disputed tweets still lacking a final label, in (cluster, tweet id)
    /// order.
    pub fn disagreement_queue(&self) -> Result<Vec<DisagreementItem>, AnnotateError> {
        if self.status == SessionStatus::Labeling {
            return Err(AnnotateError::WrongState { expected: SessionStatus::Adjudicating, actual: self.status });
        }
        Ok(self
            .disagreed
            .iter()
            .filter(|i| !self.adjudicated.contains_key(i))
            .map(|&i| {
                let names = self.label_set.labels();
                let mut pair = [names[self.labels[0][&i]].clone(), names[self.labels[1][&i]].clone()];
                pair.sort();
                let item = &self.items[i];
                DisagreementItem {
                    tweet_id: item.tweet_id.clone(),
                    cluster_id: item.cluster_id,
                    text: item.text.clone(),
                    candidate_labels: pair,
                }
            })
            .collect())
    }

    /// Sets the final label of a disputed tweet. Any label in the set is
    /// accepted, not only the two candidates.
    pub fn adjudicate(&mut self, tweet_id: &str, label: &str) -> Result<(), AnnotateError> {
        self.expect(SessionStatus::Adjudicating)?;
        let item = self.item_index(tweet_id)?;
        let label = self.label_index(label)?;
        if !self.disagreed.contains(&item) {
            return Err(AnnotateError::NotDisagreed(tweet_id.to_string()));
        }
        self.adjudicated.insert(item, label);
        if self.adjudicated.len() == self.items.len() {
            self.status = SessionStatus::Closed;
        }
        Ok(())
    }

    /// Kappa over tweets both annotators have labeled.
    pub fn cohen_kappa(&self) -> Result<KappaResult, AnnotateError> {
        let k = self.label_set.len();
        let mut confusion = alloc::vec![alloc::vec![0u64; k]; k];
        for (item, &a) in &self.labels[0] {
            if let Some(&b) = self.labels[1].get(item) {
                confusion[a][b] += 1;
            }
        }
        kappa_from_confusion(self.label_set.labels().to_vec(), confusion)
    }

    pub fn weighted_category_estimate(&self) -> Result<CategoryEstimate, AnnotateError> {
        self.expect(SessionStatus::Closed)?;
        let finals: Vec<(u32, usize)> = self.adjudicated.iter().map(|(&i, &l)| (self.items[i].cluster_id, l)).collect();
        Ok(weighted_estimate(self.label_set.labels(), &finals, &self.cluster_ratios))
    }

    pub fn final_rows(&self) -> Vec<FinalLabelRow> {
        let name = |l: Option<&usize>| l.map(|&l| self.label_set.labels()[l].clone());
        self.items
            .iter()
            .enumerate()
            .map(|(i, item)| FinalLabelRow {
                tweet_id: item.tweet_id.clone(),
                cluster_id: item.cluster_id,
                annotator_a_label: name(self.labels[0].get(&i)),
                annotator_b_label: name(self.labels[1].get(&i)),
                final_label: name(self.adjudicated.get(&i)),
            })
            .collect()
    }
}

fn check_ratios(ratios: &[f64], items: &[SampleItem]) -> Result<(), AnnotateError> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(AnnotateError::BadClusterRatios("entries must be finite and non-negative".to_string()));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(AnnotateError::BadClusterRatios(alloc::format!("sum is {sum}, not 1")));
    }
    let sampled: BTreeSet<u32> = items.iter().map(|i| i.cluster_id).collect();
    if let Some(&c) = sampled.iter().find(|&&c| c as usize >= ratios.len()) {
        return Err(AnnotateError::BadClusterRatios(alloc::format!("no ratio for cluster {c}")));
    }
    for (c, &r) in ratios.iter().enumerate() {
        if r > 0.0 && !sampled.contains(&(c as u32)) {
            return Err(AnnotateError::UnsampledCluster(c as u32));
        }
    }
    Ok(())
}
