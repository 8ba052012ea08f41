use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::AnnotateError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    /// `None` when both annotators used one and the same label (p_e = 1).
    pub kappa: Option<f64>,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    /// Label order of `confusion`'s rows (first annotator) and columns.
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub n_items: u64,
}

/// Cohen's kappa from a square confusion matrix.
///
/// Evaluated as `(n·agree − Σ aᵢbᵢ) / (n² − Σ aᵢbᵢ)` in integers, which is
/// algebraically `(p_o − p_e)/(1 − p_e)` but rounds only once.
pub fn kappa_from_confusion(labels: Vec<String>, confusion: Vec<Vec<u64>>) -> Result<KappaResult, AnnotateError> {
    let k = confusion.len();
    debug_assert!(confusion.iter().all(|r| r.len() == k));
    let n: u64 = confusion.iter().flatten().sum();
    if n == 0 {
        return Err(AnnotateError::NoSharedItems);
    }
    let agree: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let chance: u128 = (0..k)
        .map(|i| {
            let row: u64 = confusion[i].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[i]).sum();
            u128::from(row) * u128::from(col)
        })
        .sum();
    let n2 = u128::from(n) * u128::from(n);
    let num = (u128::from(agree) * u128::from(n)) as i128 - chance as i128;
    let den = n2 - chance;
    let kappa = if den == 0 { None } else { Some((num as f64 / den as f64).clamp(-1.0, 1.0)) };
    Ok(KappaResult {
        kappa,
        observed_agreement: agree as f64 / n as f64,
        expected_agreement: chance as f64 / n2 as f64,
        labels,
        confusion,
        n_items: n,
    })
}
