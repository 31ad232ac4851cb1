use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::NELabel;

/// Pairwise agreement between the two primary annotators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub annotators: (String, String),
    pub n_labeled_by_both: usize,
    pub n_agree: usize,
    /// 0 when `empty`.
    pub percent_agreement: f64,
    /// Cohen's kappa; 0 when `empty`.
    pub kappa: f64,
    pub empty: bool,
    pub disagreements: Vec<Disagreement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub entity_id: String,
    pub surface: String,
    pub labels: BTreeMap<String, NELabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjudicated: Option<NELabel>,
}

/// Raw agreement counts and Cohen's kappa over label pairs.
///
/// Returns `(n, n_agree, percent, kappa)`; `None` when there are no pairs.
pub fn agreement_stats(pairs: &[(NELabel, NELabel)]) -> Option<(usize, usize, f64, f64)> {
    let n = pairs.len();
    if n == 0 {
        return None;
    }
    let mut table = [[0usize; 4]; 4];
    for &(a, b) in pairs {
        table[a.index()][b.index()] += 1;
    }
    let agree: usize = (0..4).map(|k| table[k][k]).sum();
    let nf = n as f64;
    let observed = agree as f64 / nf;
    let expected: f64 = (0..4)
        .map(|k| {
            let row: usize = table[k].iter().sum();
            let col: usize = table.iter().map(|r| r[k]).sum();
            (row as f64 / nf) * (col as f64 / nf)
        })
        .sum();
    let kappa = if (1.0 - expected).abs() < f64::EPSILON {
        // both raters used a single identical label throughout
        1.0
    } else {
        (observed - expected) / (1.0 - expected)
    };
    Some((n, agree, 100.0 * observed, kappa))
}
