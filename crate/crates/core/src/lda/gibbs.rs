use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::alpha::optimize_alpha;
use super::corpus::BowCorpus;
use super::LdaError;
use crate::rng::{seeded, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub num_topics: usize,
    /// Initial symmetric value of every alpha component.
    pub alpha0: f64,
    pub beta: f64,
    pub iterations: usize,
    /// Re-fit alpha every this many iterations once past `burn_in`; 0
    /// disables re-fitting.
    pub optimize_interval: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaParams {
    pub fn new(num_topics: usize) -> Self {
        LdaParams {
            num_topics,
            alpha0: 5.0 / num_topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            optimize_interval: 10,
            burn_in: 100,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), LdaError> {
        if self.num_topics == 0 {
            return Err(LdaError::ZeroTopics);
        }
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(LdaError::NonPositivePrior { alpha0: self.alpha0, beta: self.beta });
        }
        if self.iterations == 0 {
            return Err(LdaError::ZeroIterations);
        }
        Ok(())
    }
}

/// A (partially) trained topic model: priors, count matrices and the topic
/// assignment of every token.
///
/// Topic–word counts are stored word-major (`V × K`) so the sampler reads
/// one contiguous row per token; use [`LdaModel::topic_word`] for the
/// `n_kw` view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub seed: u64,
    pub iterations_run: usize,
    pub doc_ids: Vec<String>,
    /// Word id of every token, documents expanded in word-id order.
    pub tokens: Vec<Vec<u32>>,
    /// Topic of every token, parallel to `tokens`.
    pub assignments: Vec<Vec<u32>>,
    /// `D × K`, row-major.
    pub doc_topic: Vec<u32>,
    /// `V × K`, row-major.
    pub word_topic: Vec<u32>,
    pub topic_totals: Vec<u64>,
}

impl LdaModel {
    /// Builds a model from explicit assignments, deriving every count from
    /// them.
    pub fn from_assignments(
        corpus: &BowCorpus,
        alpha: Vec<f64>,
        beta: f64,
        assignments: Vec<Vec<u32>>,
    ) -> Result<Self, LdaError> {
        let num_topics = alpha.len();
        if num_topics == 0 {
            return Err(LdaError::ZeroTopics);
        }
        if !positive(beta) || !alpha.iter().all(|&a| positive(a)) {
            return Err(LdaError::NonPositivePrior { alpha0: alpha[0], beta });
        }
        let tokens = expand(corpus);
        if assignments.len() != tokens.len() || assignments.iter().zip(&tokens).any(|(z, t)| z.len() != t.len()) {
            return Err(LdaError::AssignmentShape);
        }
        if let Some(&topic) = assignments.iter().flatten().find(|&&z| z as usize >= num_topics) {
            return Err(LdaError::TopicOutOfRange { topic, num_topics });
        }
        let vocab_size = corpus.vocab_size;
        let mut model = LdaModel {
            num_topics,
            vocab_size,
            alpha,
            beta,
            seed: 0,
            iterations_run: 0,
            doc_ids: corpus.docs.iter().map(|d| d.tweet_id.clone()).collect(),
            doc_topic: vec![0; tokens.len() * num_topics],
            word_topic: vec![0; vocab_size * num_topics],
            topic_totals: vec![0; num_topics],
            tokens,
            assignments,
        };
        for d in 0..model.tokens.len() {
            for i in 0..model.tokens[d].len() {
                let (w, z) = (model.tokens[d][i] as usize, model.assignments[d][i] as usize);
                model.doc_topic[d * num_topics + z] += 1;
                model.word_topic[w * num_topics + z] += 1;
                model.topic_totals[z] += 1;
            }
        }
        Ok(model)
    }

    pub fn num_docs(&self) -> usize {
        self.tokens.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens.iter().map(Vec::len).sum()
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.tokens[doc].len()
    }

    pub fn doc_topic_row(&self, doc: usize) -> &[u32] {
        &self.doc_topic[doc * self.num_topics..(doc + 1) * self.num_topics]
    }

    /// `n_kw`: tokens of word `word` assigned to `topic`.
    pub fn topic_word(&self, topic: usize, word: usize) -> u32 {
        self.word_topic[word * self.num_topics + topic]
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Verifies the count invariants against the assignments. Returns a
    /// description of the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        use alloc::format;
        let k = self.num_topics;
        for d in 0..self.num_docs() {
            let row: u64 = self.doc_topic_row(d).iter().map(|&c| u64::from(c)).sum();
            if row != self.doc_len(d) as u64 {
                return Err(format!("doc {d}: n_dk sums to {row}, length {}", self.doc_len(d)));
            }
        }
        for t in 0..k {
            let col: u64 = (0..self.vocab_size).map(|w| u64::from(self.topic_word(t, w))).sum();
            if col != self.topic_totals[t] {
                return Err(format!("topic {t}: n_kw sums to {col}, n_k is {}", self.topic_totals[t]));
            }
        }
        let total: u64 = self.topic_totals.iter().sum();
        if total != self.total_tokens() as u64 {
            return Err(format!("n_k sums to {total}, corpus has {} tokens", self.total_tokens()));
        }
        let rebuilt_from = |d: usize, t: usize| self.assignments[d].iter().filter(|&&z| z as usize == t).count();
        for d in 0..self.num_docs() {
            for t in 0..k {
                if rebuilt_from(d, t) != self.doc_topic_row(d)[t] as usize {
                    return Err(format!("doc {d} topic {t}: n_dk disagrees with assignments"));
                }
            }
        }
        if !self.alpha.iter().all(|&a| positive(a)) || !positive(self.beta) {
            return Err(String::from("non-positive prior"));
        }
        Ok(())
    }
}

/// True for finite or infinite values above zero; false for NaN.
fn positive(x: f64) -> bool {
    x > 0.0
}

fn expand(corpus: &BowCorpus) -> Vec<Vec<u32>> {
    corpus
        .docs
        .iter()
        .map(|d| d.words.iter().flat_map(|&(w, c)| core::iter::repeat_n(w, c as usize)).collect())
        .collect()
}

/// Collapsed Gibbs sampler over a mutable [`LdaModel`].
pub struct GibbsSampler {
    model: LdaModel,
    params: LdaParams,
    rng: SeededRng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Draws every initial assignment uniformly from the seeded generator.
    pub fn new(corpus: &BowCorpus, params: &LdaParams) -> Result<Self, LdaError> {
        params.validate()?;
        if corpus.docs.is_empty() || corpus.total_tokens == 0 {
            return Err(LdaError::EmptyCorpus);
        }
        let mut rng = seeded(params.seed);
        let k = params.num_topics as u32;
        let assignments = corpus.docs.iter().map(|d| (0..d.len()).map(|_| rng.gen_range(0..k)).collect()).collect();
        Self::with_rng(corpus, params, assignments, rng)
    }

    /// Starts from given assignments, e.g. to probe the conditional on a
    /// hand-built state.
    pub fn from_assignments(
        corpus: &BowCorpus,
        params: &LdaParams,
        assignments: Vec<Vec<u32>>,
    ) -> Result<Self, LdaError> {
        params.validate()?;
        Self::with_rng(corpus, params, assignments, seeded(params.seed))
    }

    fn with_rng(
        corpus: &BowCorpus,
        params: &LdaParams,
        assignments: Vec<Vec<u32>>,
        rng: SeededRng,
    ) -> Result<Self, LdaError> {
        let alpha = vec![params.alpha0; params.num_topics];
        let mut model = LdaModel::from_assignments(corpus, alpha, params.beta, assignments)?;
        model.seed = params.seed;
        Ok(GibbsSampler { model, params: params.clone(), rng, weights: vec![0.0; params.num_topics] })
    }

    pub fn model(&self) -> &LdaModel {
        &self.model
    }

    pub fn into_model(self) -> LdaModel {
        self.model
    }

    /// Overrides alpha, e.g. to reproduce a fixture with an asymmetric prior.
    pub fn set_alpha(&mut self, alpha: Vec<f64>) -> Result<(), LdaError> {
        if alpha.len() != self.model.num_topics {
            return Err(LdaError::AlphaLength { got: alpha.len(), expected: self.model.num_topics });
        }
        self.model.alpha = alpha;
        Ok(())
    }

    fn remove(&mut self, doc: usize, pos: usize) {
        let k = self.model.num_topics;
        let w = self.model.tokens[doc][pos] as usize;
        let z = self.model.assignments[doc][pos] as usize;
        self.model.doc_topic[doc * k + z] -= 1;
        self.model.word_topic[w * k + z] -= 1;
        self.model.topic_totals[z] -= 1;
    }

    fn add(&mut self, doc: usize, pos: usize, z: usize) {
        let k = self.model.num_topics;
        let w = self.model.tokens[doc][pos] as usize;
        self.model.assignments[doc][pos] = z as u32;
        self.model.doc_topic[doc * k + z] += 1;
        self.model.word_topic[w * k + z] += 1;
        self.model.topic_totals[z] += 1;
    }

    /// Unnormalized `(n_dk + α_k)(n_kw + β)/(n_k + Vβ)` for the token at
    /// `(doc, pos)`, which must already be removed from the counts.
    fn fill_weights(&mut self, doc: usize, pos: usize) -> f64 {
        let m = &self.model;
        let k = m.num_topics;
        let w = m.tokens[doc][pos] as usize;
        let vbeta = m.vocab_size as f64 * m.beta;
        let doc_row = &m.doc_topic[doc * k..(doc + 1) * k];
        let word_row = &m.word_topic[w * k..(w + 1) * k];
        let mut total = 0.0;
        for t in 0..k {
            let p = (f64::from(doc_row[t]) + m.alpha[t]) * (f64::from(word_row[t]) + m.beta)
                / (m.topic_totals[t] as f64 + vbeta);
            total += p;
            self.weights[t] = p;
        }
        total
    }

    /// The normalized full conditional of the token at `(doc, pos)` given
    /// all other assignments. Leaves the state unchanged.
    pub fn full_conditional(&mut self, doc: usize, pos: usize) -> Vec<f64> {
        let z = self.model.assignments[doc][pos] as usize;
        self.remove(doc, pos);
        let total = self.fill_weights(doc, pos);
        let out = self.weights.iter().map(|p| p / total).collect();
        self.add(doc, pos, z);
        out
    }

    /// Resamples one token from its full conditional and returns its new
    /// topic.
    pub fn resample_token(&mut self, doc: usize, pos: usize) -> usize {
        self.remove(doc, pos);
        let total = self.fill_weights(doc, pos);
        let u = self.rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut z = self.model.num_topics - 1;
        for (t, p) in self.weights.iter().enumerate() {
            acc += p;
            if u < acc {
                z = t;
                break;
            }
        }
        self.add(doc, pos, z);
        z
    }

    /// One pass over every token, documents in order.
    pub fn sweep(&mut self) {
        for d in 0..self.model.num_docs() {
            for i in 0..self.model.doc_len(d) {
                self.resample_token(d, i);
            }
        }
        self.model.iterations_run += 1;
    }

    /// Re-fits alpha from the current counts. On failure the previous alpha
    /// is kept and a warning logged.
    pub fn refit_alpha(&mut self) {
        match optimize_alpha(&self.model) {
            Ok(fit) => self.model.alpha = fit.alpha,
            Err(e) => log::warn!("alpha optimization skipped at iteration {}: {e}", self.model.iterations_run),
        }
    }

    fn due_for_refit(&self) -> bool {
        let it = self.model.iterations_run;
        let every = self.params.optimize_interval;
        every > 0 && it > self.params.burn_in && it.is_multiple_of(every)
    }

    /// Runs the remaining iterations, calling `observer` after each one.
    pub fn run<F: FnMut(&LdaModel)>(&mut self, mut observer: F) {
        while self.model.iterations_run < self.params.iterations {
            self.sweep();
            if self.due_for_refit() {
                self.refit_alpha();
            }
            observer(&self.model);
        }
    }
}

/// Trains a model from scratch. Identical inputs and seed give a
/// bit-identical model.
pub fn train(corpus: &BowCorpus, params: &LdaParams) -> Result<LdaModel, LdaError> {
    train_with(corpus, params, |_| {})
}

pub fn train_with<F: FnMut(&LdaModel)>(
    corpus: &BowCorpus,
    params: &LdaParams,
    observer: F,
) -> Result<LdaModel, LdaError> {
    let mut sampler = GibbsSampler::new(corpus, params)?;
    sampler.run(observer);
    Ok(sampler.into_model())
}
