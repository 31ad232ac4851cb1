//! Character n-gram classification of entity surfaces under stratified
//! k-fold cross-validation.

mod cv;
mod features;
mod folds;
mod metrics;
mod models;

use thiserror::Error;

use crate::corpus::NELabel;

pub use cv::{
    cross_validate, full_split_accuracy, learning_curve, curve_to_csv, ClassShare, ConfigEcho,
    CurvePoint, CvConfig, EvalReport, FoldMean, FoldReport, LabeledItem,
};
pub use features::{char_ngrams, FeatureSpace, SparseVector};
pub use folds::{fold_seed, stratified_kfold};
pub use metrics::{f1_score, metrics, ClassScores, ConfusionMatrix, Metrics, Prf};
pub use models::{
    classes_of, hinge_objective, softmax, softmax_objective, train, train_with_classes,
    Hyperparams, LinearModel, Model, ModelKind, NaiveBayesModel, Objective,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("feature space must be frozen before featurizing")]
    SpaceNotFrozen,
    #[error("feature space is frozen")]
    SpaceFrozen,
    #[error("feature index {index} outside a space of {n_features} features")]
    DimensionMismatch { index: usize, n_features: usize },
    #[error("{samples} samples but {labels} labels")]
    LengthMismatch { samples: usize, labels: usize },
    #[error("no training samples")]
    EmptyTrainingSet,
    #[error("label {0} is not in the model's class set")]
    UnknownClass(NELabel),
    #[error("{0} does not produce probabilities")]
    NotProbabilistic(ModelKind),
    #[error("confusion matrix is empty")]
    EmptyConfusion,
    #[error("confusion matrix is not square over its label set")]
    NotSquare,
    #[error("invalid fold count {k} for {n} items (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("fraction {fraction} drops class {label} from the training subsample")]
    FractionTooSmall { fraction: f64, label: NELabel },
    #[error("fractions must lie in (0, 1] and ascend, got {0:?}")]
    BadFractions(Vec<f64>),
}
