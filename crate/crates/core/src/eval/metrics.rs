use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::NELabel;

/// Square count matrix over an active label set; rows are true labels,
/// columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<NELabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<NELabel>) -> Self {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(labels: Vec<NELabel>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(EvalError::NotSquare);
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    fn index(&self, l: NELabel) -> Result<usize, EvalError> {
        self.labels
            .iter()
            .position(|&x| x == l)
            .ok_or(EvalError::UnknownClass(l))
    }

    pub fn record(&mut self, truth: NELabel, predicted: NELabel) -> Result<(), EvalError> {
        let (t, p) = (self.index(truth)?, self.index(predicted)?);
        self.counts[t][p] += 1;
        Ok(())
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<(), EvalError> {
        if other.labels != self.labels {
            return Err(EvalError::NotSquare);
        }
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Zero denominators give 0; the flag reports whether that happened.
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> (Prf, bool) {
        let mut zero_division = false;
        let mut ratio = |num: u64, den: u64| {
            if den == 0 {
                zero_division = true;
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = f1_score(precision, recall);
        (
            Prf {
                precision,
                recall,
                f1,
            },
            zero_division,
        )
    }
}

pub fn f1_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: BTreeMap<NELabel, ClassScores>,
    pub micro: Prf,
    /// Support-weighted mean of the per-class scores.
    pub weighted: Prf,
    pub accuracy: f64,
    pub zero_division: bool,
}

pub fn metrics(confusion: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let k = confusion.labels.len();
    if confusion.counts.len() != k || confusion.counts.iter().any(|r| r.len() != k) {
        return Err(EvalError::NotSquare);
    }
    let total = confusion.total();
    if k == 0 || total == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    let mut zero_division = false;
    let mut per_class = BTreeMap::new();
    let (mut tp_sum, mut fp_sum, mut fn_sum) = (0u64, 0u64, 0u64);
    let mut weighted = [0.0f64; 3];
    for (c, &label) in confusion.labels.iter().enumerate() {
        let tp = confusion.counts[c][c];
        let row: u64 = confusion.counts[c].iter().sum();
        let col: u64 = confusion.counts.iter().map(|r| r[c]).sum();
        let (fp, fn_) = (col - tp, row - tp);
        let (prf, zd) = Prf::from_counts(tp, fp, fn_);
        zero_division |= zd;
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn_;
        weighted[0] += prf.precision * row as f64;
        weighted[1] += prf.recall * row as f64;
        weighted[2] += prf.f1 * row as f64;
        per_class.insert(
            label,
            ClassScores {
                precision: prf.precision,
                recall: prf.recall,
                f1: prf.f1,
                support: row,
            },
        );
    }
    let (micro, zd) = Prf::from_counts(tp_sum, fp_sum, fn_sum);
    zero_division |= zd;
    let t = total as f64;
    Ok(Metrics {
        per_class,
        micro,
        weighted: Prf {
            precision: weighted[0] / t,
            recall: weighted[1] / t,
            f1: weighted[2] / t,
        },
        accuracy: confusion.trace() as f64 / t,
        zero_division,
    })
}
