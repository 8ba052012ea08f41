use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LdaError;
use crate::textnorm::TokenizedDoc;

/// Dense 0-based word ids in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "DictionaryRepr", into = "DictionaryRepr")]
pub struct Dictionary {
    token_to_id: BTreeMap<String, u32>,
    id_to_token: Vec<String>,
    doc_freq: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct DictionaryRepr {
    tokens: Vec<String>,
    doc_freq: Vec<u32>,
}

impl From<DictionaryRepr> for Dictionary {
    fn from(r: DictionaryRepr) -> Self {
        let token_to_id = r.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Dictionary { token_to_id, id_to_token: r.tokens, doc_freq: r.doc_freq }
    }
}

impl From<Dictionary> for DictionaryRepr {
    fn from(d: Dictionary) -> Self {
        DictionaryRepr { tokens: d.id_to_token, doc_freq: d.doc_freq }
    }
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowDoc {
    pub tweet_id: String,
    /// `(word_id, count)` sorted by word id; every count is at least 1.
    pub words: Vec<(u32, u32)>,
}

impl BowDoc {
    pub fn len(&self) -> usize {
        self.words.iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BowCorpus {
    pub docs: Vec<BowDoc>,
    pub vocab_size: usize,
    pub total_tokens: usize,
}

impl BowCorpus {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }
}

#[derive(Debug, Clone)]
pub struct CorpusBuild {
    pub dictionary: Dictionary,
    pub corpus: BowCorpus,
    /// Ids of documents left out because they had no tokens, either on
    /// input or after vocabulary pruning.
    pub excluded: Vec<String>,
}

/// Builds the dictionary and bag-of-words corpus, dropping words whose
/// document frequency is below `min_doc_freq` or above
/// `max_doc_fraction · D` (D counts the non-empty input documents).
pub fn build_corpus(
    docs: &[TokenizedDoc],
    min_doc_freq: usize,
    max_doc_fraction: f64,
) -> Result<CorpusBuild, LdaError> {
    let mut excluded = Vec::new();
    let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    let mut df: Vec<u32> = Vec::new();
    let mut live = Vec::new();

    for doc in docs {
        if doc.tokens.is_empty() {
            excluded.push(doc.tweet_id.clone());
            continue;
        }
        live.push(doc);
        let mut seen_here: Vec<usize> = Vec::new();
        for tok in &doc.tokens {
            let id = *first_seen.entry(tok.as_str()).or_insert_with(|| {
                order.push(tok.as_str());
                df.push(0);
                order.len() - 1
            });
            seen_here.push(id);
        }
        seen_here.sort_unstable();
        seen_here.dedup();
        for id in seen_here {
            df[id] += 1;
        }
    }

    let num_live = live.len() as f64;
    let mut remap: Vec<Option<u32>> = Vec::with_capacity(order.len());
    let mut id_to_token = Vec::new();
    let mut doc_freq = Vec::new();
    for (old, tok) in order.iter().enumerate() {
        let f = df[old];
        let keep = f as usize >= min_doc_freq && f64::from(f) <= max_doc_fraction * num_live;
        if keep {
            remap.push(Some(id_to_token.len() as u32));
            id_to_token.push(String::from(*tok));
            doc_freq.push(f);
        } else {
            remap.push(None);
        }
    }

    let mut bow_docs = Vec::with_capacity(live.len());
    let mut total_tokens = 0usize;
    for doc in live {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in &doc.tokens {
            if let Some(id) = remap[first_seen[tok.as_str()]] {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            excluded.push(doc.tweet_id.clone());
            continue;
        }
        let words: Vec<(u32, u32)> = counts.into_iter().collect();
        total_tokens += words.iter().map(|&(_, c)| c as usize).sum::<usize>();
        bow_docs.push(BowDoc { tweet_id: doc.tweet_id.clone(), words });
    }

    if bow_docs.is_empty() {
        return Err(LdaError::EmptyCorpus);
    }
    let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    let vocab_size = id_to_token.len();
    Ok(CorpusBuild {
        dictionary: Dictionary { token_to_id, id_to_token, doc_freq },
        corpus: BowCorpus { docs: bow_docs, vocab_size, total_tokens },
        excluded,
    })
}
