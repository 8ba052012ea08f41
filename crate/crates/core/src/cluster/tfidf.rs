use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::sparse::SparseMatrix;
use super::ClusterError;
use crate::textnorm::TokenizedDoc;

/// Vocabulary columns follow sorted token order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    pub vocabulary: BTreeMap<String, u32>,
    pub idf: Vec<f64>,
    pub doc_count: usize,
}

#[derive(Debug, Clone)]
pub struct TfIdfOutput {
    pub model: TfIdfModel,
    pub matrix: SparseMatrix,
    /// Rows with no tokens, left as zero vectors.
    pub zero_rows: Vec<usize>,
}

impl TfIdfModel {
    /// Raw term counts times idf, each non-zero row scaled to unit L2 norm.
    /// Unknown tokens are ignored.
    pub fn transform(&self, docs: &[TokenizedDoc]) -> (SparseMatrix, Vec<usize>) {
        let mut m = SparseMatrix::new(self.idf.len());
        let mut zero_rows = Vec::new();
        for (i, doc) in docs.iter().enumerate() {
            let mut tf: BTreeMap<u32, u32> = BTreeMap::new();
            for tok in &doc.tokens {
                if let Some(&c) = self.vocabulary.get(tok) {
                    *tf.entry(c).or_insert(0) += 1;
                }
            }
            let weighted: Vec<(u32, f64)> =
                tf.into_iter().map(|(c, n)| (c, f64::from(n) * self.idf[c as usize])).collect();
            let norm = libm::sqrt(weighted.iter().map(|(_, v)| v * v).sum::<f64>());
            if norm == 0.0 {
                zero_rows.push(i);
                m.push_row(core::iter::empty());
            } else {
                m.push_row(weighted.into_iter().map(|(c, v)| (c, v / norm)));
            }
        }
        (m, zero_rows)
    }
}

/// Fits smoothed idf `ln((1 + D)/(1 + df)) + 1` and returns the normalized
/// TF-IDF rows.
pub fn tfidf_fit_transform(docs: &[TokenizedDoc]) -> Result<TfIdfOutput, ClusterError> {
    if docs.is_empty() {
        return Err(ClusterError::NoDocuments);
    }
    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in docs {
        let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if df.is_empty() {
        return Err(ClusterError::EmptyVocabulary);
    }
    let d = docs.len() as f64;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(df.len());
    for (i, (tok, f)) in df.into_iter().enumerate() {
        vocabulary.insert(String::from(tok), i as u32);
        idf.push(libm::log((1.0 + d) / (1.0 + f64::from(f))) + 1.0);
    }
    let model = TfIdfModel { vocabulary, idf, doc_count: docs.len() };
    let (matrix, zero_rows) = model.transform(docs);
    Ok(TfIdfOutput { model, matrix, zero_rows })
}
