use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::SparseVector;
use super::EvalError;
use crate::corpus::NELabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "lr")]
    LogisticRegression,
    #[serde(rename = "svm")]
    LinearSvm,
    #[serde(rename = "sgd")]
    SgdLog,
    #[serde(rename = "nb")]
    NaiveBayes,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::LogisticRegression,
        ModelKind::LinearSvm,
        ModelKind::NaiveBayes,
        ModelKind::SgdLog,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "lr",
            ModelKind::LinearSvm => "svm",
            ModelKind::SgdLog => "sgd",
            ModelKind::NaiveBayes => "nb",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "Logistic Regression",
            ModelKind::LinearSvm => "Linear SVM",
            ModelKind::SgdLog => "SGD (log loss)",
            ModelKind::NaiveBayes => "Multinomial Naive Bayes",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lr" => Ok(ModelKind::LogisticRegression),
            "svm" => Ok(ModelKind::LinearSvm),
            "sgd" => Ok(ModelKind::SgdLog),
            "nb" => Ok(ModelKind::NaiveBayes),
            other => Err(format!("unknown model {other:?} (lr|svm|nb|sgd)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Per-step decay of the SGD learning rate, `lr / (1 + t * decay)`.
    pub decay: f64,
    /// Laplace smoothing for Naive Bayes.
    pub alpha: f64,
    pub seed: u64,
}

impl Hyperparams {
    pub fn default_for(kind: ModelKind) -> Self {
        let base = Hyperparams {
            learning_rate: 0.1,
            l2_lambda: 1e-4,
            epochs: 100,
            batch_size: 32,
            decay: 0.0,
            alpha: 1.0,
            seed: 42,
        };
        match kind {
            ModelKind::LogisticRegression | ModelKind::LinearSvm | ModelKind::NaiveBayes => base,
            ModelKind::SgdLog => Hyperparams {
                epochs: 5,
                batch_size: 1,
                decay: 1e-3,
                ..base
            },
        }
    }
}

/// Dense class-by-feature weights plus per-class bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub classes: Vec<NELabel>,
    pub n_features: usize,
    /// Row-major, `classes.len() * n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub hyperparams: Hyperparams,
}

impl LinearModel {
    pub fn zeros(
        kind: ModelKind,
        classes: Vec<NELabel>,
        n_features: usize,
        hyperparams: Hyperparams,
    ) -> Self {
        let c = classes.len();
        LinearModel {
            kind,
            classes,
            n_features,
            weights: vec![0.0; c * n_features],
            bias: vec![0.0; c],
            hyperparams,
        }
    }

    fn row(&self, c: usize) -> &[f64] {
        &self.weights[c * self.n_features..(c + 1) * self.n_features]
    }

    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| x.dot(self.row(c)) + self.bias[c])
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub classes: Vec<NELabel>,
    pub n_features: usize,
    pub class_log_priors: Vec<f64>,
    /// Row-major, `classes.len() * n_features`.
    pub feature_log_likelihoods: Vec<f64>,
    pub alpha: f64,
}

impl NaiveBayesModel {
    /// Joint log likelihood per class: log prior + Σ count · log θ.
    pub fn joint_log_likelihood(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                let row = &self.feature_log_likelihoods
                    [c * self.n_features..(c + 1) * self.n_features];
                self.class_log_priors[c] + x.dot(row)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Linear(LinearModel),
    NaiveBayes(NaiveBayesModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Linear(m) => m.kind,
            Model::NaiveBayes(_) => ModelKind::NaiveBayes,
        }
    }

    pub fn classes(&self) -> &[NELabel] {
        match self {
            Model::Linear(m) => &m.classes,
            Model::NaiveBayes(m) => &m.classes,
        }
    }

    fn n_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_features,
            Model::NaiveBayes(m) => m.n_features,
        }
    }

    fn check_dims(&self, x: &SparseVector) -> Result<(), EvalError> {
        match x.max_index() {
            Some(i) if i >= self.n_features() => Err(EvalError::DimensionMismatch {
                index: i,
                n_features: self.n_features(),
            }),
            _ => Ok(()),
        }
    }

    /// Raw per-class scores (logits, margins or joint log likelihoods).
    pub fn decision_scores(&self, x: &SparseVector) -> Result<Vec<f64>, EvalError> {
        self.check_dims(x)?;
        Ok(match self {
            Model::Linear(m) => m.scores(x),
            Model::NaiveBayes(m) => m.joint_log_likelihood(x),
        })
    }

    /// Highest-scoring class; ties go to the earliest class in
    /// PER, LOC, ORG, MISC order.
    pub fn predict(&self, x: &SparseVector) -> Result<NELabel, EvalError> {
        let scores = self.decision_scores(x)?;
        Ok(self.classes()[argmax_first(&scores)])
    }

    /// Class distribution, aligned with [`Model::classes`]. Not available for
    /// the SVM, whose margins are not probabilities.
    pub fn predict_proba(&self, x: &SparseVector) -> Result<Vec<f64>, EvalError> {
        let scores = self.decision_scores(x)?;
        match self {
            Model::Linear(m) => match m.kind {
                ModelKind::LogisticRegression => Ok(softmax(&scores)),
                ModelKind::SgdLog => {
                    let s: Vec<f64> = scores.iter().map(|&z| sigmoid(z)).collect();
                    let total: f64 = s.iter().sum();
                    if total > 0.0 {
                        Ok(s.iter().map(|p| p / total).collect())
                    } else {
                        Ok(vec![1.0 / s.len() as f64; s.len()])
                    }
                }
                _ => Err(EvalError::NotProbabilistic(m.kind)),
            },
            Model::NaiveBayes(_) => Ok(softmax(&scores)),
        }
    }
}

pub(crate) fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Loss and gradient of a linear model on a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub loss: f64,
    pub grad_weights: Vec<f64>,
    pub grad_bias: Vec<f64>,
}

/// Mean softmax cross-entropy plus `λ/2 · ‖W‖²` (bias unregularized).
pub fn softmax_objective(
    weights: &[f64],
    bias: &[f64],
    xs: &[SparseVector],
    ys: &[usize],
    n_features: usize,
    l2_lambda: f64,
) -> Objective {
    let c = bias.len();
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; c];
    for (x, &y) in xs.iter().zip(ys) {
        let z: Vec<f64> = (0..c)
            .map(|k| x.dot(&weights[k * n_features..(k + 1) * n_features]) + bias[k])
            .collect();
        let p = softmax(&z);
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for k in 0..c {
            let d = (p[k] - if k == y { 1.0 } else { 0.0 }) / n;
            gb[k] += d;
            for &(i, v) in x.entries() {
                gw[k * n_features + i] += d * v;
            }
        }
    }
    loss /= n;
    add_l2(weights, l2_lambda, &mut loss, &mut gw);
    Objective {
        loss,
        grad_weights: gw,
        grad_bias: gb,
    }
}

/// One-vs-rest hinge loss, mean over samples and summed over classes,
/// plus `λ/2 · ‖W‖²`. The gradient is exact away from margin 1.
pub fn hinge_objective(
    weights: &[f64],
    bias: &[f64],
    xs: &[SparseVector],
    ys: &[usize],
    n_features: usize,
    l2_lambda: f64,
) -> Objective {
    let c = bias.len();
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; c];
    for (x, &y) in xs.iter().zip(ys) {
        for k in 0..c {
            let sign = if k == y { 1.0 } else { -1.0 };
            let score = x.dot(&weights[k * n_features..(k + 1) * n_features]) + bias[k];
            let slack = 1.0 - sign * score;
            if slack > 0.0 {
                loss += slack;
                gb[k] -= sign / n;
                for &(i, v) in x.entries() {
                    gw[k * n_features + i] -= sign * v / n;
                }
            }
        }
    }
    loss /= n;
    add_l2(weights, l2_lambda, &mut loss, &mut gw);
    Objective {
        loss,
        grad_weights: gw,
        grad_bias: gb,
    }
}

fn add_l2(weights: &[f64], l2_lambda: f64, loss: &mut f64, gw: &mut [f64]) {
    if l2_lambda == 0.0 {
        return;
    }
    *loss += 0.5 * l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
    for (g, w) in gw.iter_mut().zip(weights) {
        *g += l2_lambda * w;
    }
}

/// Classes present in `ys`, in label order.
pub fn classes_of(ys: &[NELabel]) -> Vec<NELabel> {
    let mut classes: Vec<NELabel> = ys.to_vec();
    classes.sort();
    classes.dedup();
    classes
}

/// Fits a model on featurized samples. `n_features` is the size of the
/// frozen feature space the samples came from.
pub fn train(
    kind: ModelKind,
    xs: &[SparseVector],
    ys: &[NELabel],
    n_features: usize,
    hyperparams: Hyperparams,
) -> Result<Model, EvalError> {
    train_with_classes(kind, xs, ys, &classes_of(ys), n_features, hyperparams)
}

/// Like [`train`] with an explicit class list, e.g. to keep a class that
/// has no training samples in the output space.
pub fn train_with_classes(
    kind: ModelKind,
    xs: &[SparseVector],
    ys: &[NELabel],
    classes: &[NELabel],
    n_features: usize,
    hyperparams: Hyperparams,
) -> Result<Model, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch {
            samples: xs.len(),
            labels: ys.len(),
        });
    }
    if xs.is_empty() || classes.is_empty() {
        return Err(EvalError::EmptyTrainingSet);
    }
    for x in xs {
        if let Some(i) = x.max_index().filter(|&i| i >= n_features) {
            return Err(EvalError::DimensionMismatch {
                index: i,
                n_features,
            });
        }
    }
    let y_idx: Vec<usize> = ys
        .iter()
        .map(|y| {
            classes
                .iter()
                .position(|c| c == y)
                .ok_or(EvalError::UnknownClass(*y))
        })
        .collect::<Result<_, _>>()?;
    if classes.len() == 1 {
        log::warn!("degenerate training data: single class {}; constant predictor", classes[0]);
    }
    Ok(match kind {
        ModelKind::NaiveBayes => Model::NaiveBayes(train_naive_bayes(
            xs,
            &y_idx,
            classes.to_vec(),
            n_features,
            hyperparams.alpha,
        )),
        _ => {
            let mut m = LinearModel::zeros(kind, classes.to_vec(), n_features, hyperparams);
            if classes.len() > 1 {
                match kind {
                    ModelKind::LogisticRegression | ModelKind::LinearSvm => {
                        minibatch_descent(&mut m, xs, &y_idx)
                    }
                    ModelKind::SgdLog => sgd_one_vs_rest(&mut m, xs, &y_idx),
                    ModelKind::NaiveBayes => unreachable!(),
                }
            }
            Model::Linear(m)
        }
    })
}

/// Mini-batch gradient descent on the softmax or hinge objective. L2 decay
/// is applied to the whole weight matrix once per batch.
fn minibatch_descent(m: &mut LinearModel, xs: &[SparseVector], ys: &[usize]) {
    let hp = m.hyperparams;
    let c = m.classes.len();
    let nf = m.n_features;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let batch = hp.batch_size.max(1);
    let mut gw = vec![0.0; m.weights.len()];
    let mut touched: Vec<usize> = Vec::new();
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let nb = chunk.len() as f64;
            let mut gb = vec![0.0; c];
            for &s in chunk {
                let x = &xs[s];
                let z = m.scores(x);
                let coef: Vec<f64> = match m.kind {
                    ModelKind::LogisticRegression => {
                        let p = softmax(&z);
                        (0..c)
                            .map(|k| (p[k] - f64::from(u8::from(k == ys[s]))) / nb)
                            .collect()
                    }
                    _ => (0..c)
                        .map(|k| {
                            let sign = if k == ys[s] { 1.0 } else { -1.0 };
                            if 1.0 - sign * z[k] > 0.0 {
                                -sign / nb
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                };
                for k in 0..c {
                    if coef[k] == 0.0 {
                        continue;
                    }
                    gb[k] += coef[k];
                    for &(i, v) in x.entries() {
                        let idx = k * nf + i;
                        if gw[idx] == 0.0 {
                            touched.push(idx);
                        }
                        gw[idx] += coef[k] * v;
                    }
                }
            }
            let shrink = 1.0 - hp.learning_rate * hp.l2_lambda;
            if shrink != 1.0 {
                m.weights.iter_mut().for_each(|w| *w *= shrink);
            }
            for &idx in &touched {
                m.weights[idx] -= hp.learning_rate * gw[idx];
                gw[idx] = 0.0;
            }
            touched.clear();
            for (b, g) in m.bias.iter_mut().zip(&gb) {
                *b -= hp.learning_rate * g;
            }
        }
    }
}

/// Per-sample one-vs-rest logistic SGD with a decaying step size.
fn sgd_one_vs_rest(m: &mut LinearModel, xs: &[SparseVector], ys: &[usize]) {
    let hp = m.hyperparams;
    let c = m.classes.len();
    let nf = m.n_features;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t = 0usize;
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            let eta = hp.learning_rate / (1.0 + t as f64 * hp.decay);
            t += 1;
            let x = &xs[s];
            let z = m.scores(x);
            let shrink = 1.0 - eta * hp.l2_lambda;
            if shrink != 1.0 {
                m.weights.iter_mut().for_each(|w| *w *= shrink);
            }
            for (k, &zk) in z.iter().enumerate().take(c) {
                let target = f64::from(u8::from(k == ys[s]));
                let g = sigmoid(zk) - target;
                if g == 0.0 {
                    continue;
                }
                for &(i, v) in x.entries() {
                    m.weights[k * nf + i] -= eta * g * v;
                }
                m.bias[k] -= eta * g;
            }
        }
    }
}

fn train_naive_bayes(
    xs: &[SparseVector],
    ys: &[usize],
    classes: Vec<NELabel>,
    n_features: usize,
    alpha: f64,
) -> NaiveBayesModel {
    let c = classes.len();
    let mut class_counts = vec![0usize; c];
    let mut feature_counts = vec![0.0; c * n_features];
    for (x, &y) in xs.iter().zip(ys) {
        class_counts[y] += 1;
        for &(i, v) in x.entries() {
            feature_counts[y * n_features + i] += v;
        }
    }
    let n = xs.len() as f64;
    let class_log_priors = class_counts
        .iter()
        .map(|&k| (k as f64 / n).ln())
        .collect();
    let mut feature_log_likelihoods = vec![0.0; c * n_features];
    for k in 0..c {
        let row = &feature_counts[k * n_features..(k + 1) * n_features];
        let denom: f64 = row.iter().sum::<f64>() + alpha * n_features as f64;
        for (i, &cnt) in row.iter().enumerate() {
            feature_log_likelihoods[k * n_features + i] = ((cnt + alpha) / denom).ln();
        }
    }
    NaiveBayesModel {
        classes,
        n_features,
        class_log_priors,
        feature_log_likelihoods,
        alpha,
    }
}
