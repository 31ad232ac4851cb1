use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureSpace;
use super::folds::{fold_seed, stratified_kfold};
use super::metrics::{metrics, ConfusionMatrix, Metrics, Prf};
use super::models::{train_with_classes, Hyperparams, ModelKind};
use super::EvalError;
use crate::corpus::{EntityRecord, NELabel};

/// A surface form with its gold class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledItem {
    pub surface: String,
    pub label: NELabel,
}

impl LabeledItem {
    pub fn new(surface: impl Into<String>, label: NELabel) -> Self {
        LabeledItem {
            surface: surface.into(),
            label,
        }
    }

    /// Records without a final label are skipped.
    pub fn from_records(records: &[EntityRecord]) -> Vec<LabeledItem> {
        records
            .iter()
            .filter_map(|r| r.final_label.map(|l| LabeledItem::new(r.surface.clone(), l)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub include_misc: bool,
    pub n_min: usize,
    pub n_max: usize,
    /// `None` picks the model kind's defaults.
    pub hyperparams: Option<Hyperparams>,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            seed: 42,
            include_misc: true,
            n_min: 1,
            n_max: 5,
            hyperparams: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model: ModelKind,
    pub folds: usize,
    pub seed: u64,
    pub misc_included: bool,
    pub n_min: usize,
    pub n_max: usize,
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub vocabulary_size: usize,
    pub metrics: Metrics,
    pub confusion: ConfusionMatrix,
}

/// Arithmetic mean of the per-fold scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMean {
    pub per_class: BTreeMap<NELabel, Prf>,
    pub micro: Prf,
    pub weighted: Prf,
    pub accuracy: f64,
}

/// Cross-validation result. Top-level scores come from the confusion matrix
/// pooled over all folds; `fold_mean` averages the per-fold scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config_echo: ConfigEcho,
    pub labels: Vec<NELabel>,
    pub class_distribution: BTreeMap<NELabel, ClassShare>,
    pub per_class: BTreeMap<NELabel, super::metrics::ClassScores>,
    pub micro: Prf,
    pub weighted: Prf,
    pub accuracy: f64,
    pub zero_division: bool,
    pub confusion: ConfusionMatrix,
    pub fold_mean: FoldMean,
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-class table with the class share column, pooled micro row and the
    /// fold-mean row.
    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{} | {} folds | seed {} | MISC {}\n",
            self.config_echo.model.display_name(),
            self.config_echo.folds,
            self.config_echo.seed,
            if self.config_echo.misc_included { "included" } else { "excluded" }
        );
        s.push_str(&format!(
            "{:<10}{:>6}{:>8}{:>8}{:>8}\n",
            "class", "%", "P", "R", "F"
        ));
        for (label, sc) in &self.per_class {
            let pct = self.class_distribution.get(label).map_or(0.0, |c| c.percent);
            s.push_str(&format!(
                "{:<10}{:>6.0}{:>8.2}{:>8.2}{:>8.2}\n",
                label.as_str(),
                pct,
                sc.precision,
                sc.recall,
                sc.f1
            ));
        }
        s.push_str(&format!(
            "{:<10}{:>6}{:>8.2}{:>8.2}{:>8.2}\n",
            "micro", "", self.micro.precision, self.micro.recall, self.micro.f1
        ));
        s.push_str(&format!(
            "{:<10}{:>6}{:>8.2}{:>8.2}{:>8.2}\n",
            "weighted", "", self.weighted.precision, self.weighted.recall, self.weighted.f1
        ));
        s.push_str(&format!(
            "{:<10}{:>6}{:>8.2}{:>8.2}{:>8.2}\n",
            "fold-mean",
            "",
            self.fold_mean.micro.precision,
            self.fold_mean.micro.recall,
            self.fold_mean.micro.f1
        ));
        s.push_str(&format!("accuracy {:.4}\n", self.accuracy));
        s
    }
}

fn active_items(corpus: &[LabeledItem], include_misc: bool) -> Vec<&LabeledItem> {
    corpus
        .iter()
        .filter(|it| include_misc || it.label != NELabel::Misc)
        .collect()
}

struct SplitOutcome {
    confusion: ConfusionMatrix,
    vocabulary_size: usize,
}

/// Fits features on the training items only, trains, and scores the test
/// items.
fn run_split(
    items: &[&LabeledItem],
    train_idx: &[usize],
    test_idx: &[usize],
    labels: &[NELabel],
    kind: ModelKind,
    config: &CvConfig,
    hyperparams: Hyperparams,
) -> Result<SplitOutcome, EvalError> {
    let train_surfaces: Vec<&str> = train_idx.iter().map(|&i| items[i].surface.as_str()).collect();
    let space = FeatureSpace::fit(&train_surfaces, config.n_min, config.n_max);
    let xs = train_surfaces
        .iter()
        .map(|s| space.featurize(s))
        .collect::<Result<Vec<_>, _>>()?;
    let ys: Vec<NELabel> = train_idx.iter().map(|&i| items[i].label).collect();
    let model = train_with_classes(kind, &xs, &ys, labels, space.len(), hyperparams)?;
    let mut confusion = ConfusionMatrix::new(labels.to_vec());
    for &i in test_idx {
        let x = space.featurize(&items[i].surface)?;
        confusion.record(items[i].label, model.predict(&x)?)?;
    }
    Ok(SplitOutcome {
        confusion,
        vocabulary_size: space.len(),
    })
}

fn labels_present(items: &[&LabeledItem]) -> Vec<NELabel> {
    let mut labels: Vec<NELabel> = items.iter().map(|it| it.label).collect();
    labels.sort();
    labels.dedup();
    labels
}

fn complement(n: usize, excluded: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in excluded {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}

fn resolve_hyperparams(kind: ModelKind, config: &CvConfig) -> Hyperparams {
    let mut hp = config.hyperparams.unwrap_or_else(|| Hyperparams::default_for(kind));
    hp.seed = config.seed;
    hp
}

/// Stratified k-fold cross-validation. Folds run in parallel; each fold's
/// training RNG is seeded from `(seed, fold)` so the result does not depend
/// on scheduling.
pub fn cross_validate(
    corpus: &[LabeledItem],
    kind: ModelKind,
    config: &CvConfig,
) -> Result<EvalReport, EvalError> {
    let items = active_items(corpus, config.include_misc);
    let labels = labels_present(&items);
    let gold: Vec<NELabel> = items.iter().map(|it| it.label).collect();
    let folds = stratified_kfold(&gold, config.folds, config.seed)?;
    let base_hp = resolve_hyperparams(kind, config);

    let outcomes: Vec<SplitOutcome> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test_idx)| {
            let train_idx = complement(items.len(), test_idx);
            let hp = Hyperparams {
                seed: fold_seed(config.seed, f),
                ..base_hp
            };
            run_split(&items, &train_idx, test_idx, &labels, kind, config, hp)
        })
        .collect::<Result<_, _>>()?;

    let mut pooled = ConfusionMatrix::new(labels.clone());
    let mut fold_reports = Vec::with_capacity(outcomes.len());
    for (f, out) in outcomes.into_iter().enumerate() {
        pooled.add(&out.confusion)?;
        fold_reports.push(FoldReport {
            fold: f,
            train_size: items.len() - folds[f].len(),
            test_size: folds[f].len(),
            vocabulary_size: out.vocabulary_size,
            metrics: metrics(&out.confusion)?,
            confusion: out.confusion,
        });
    }
    let pooled_metrics = metrics(&pooled)?;
    let fold_mean = mean_of_folds(&fold_reports, &labels);

    let total = items.len();
    let class_distribution = labels
        .iter()
        .map(|&l| {
            let count = gold.iter().filter(|&&g| g == l).count();
            (
                l,
                ClassShare {
                    count,
                    percent: 100.0 * count as f64 / total as f64,
                },
            )
        })
        .collect();

    Ok(EvalReport {
        config_echo: ConfigEcho {
            model: kind,
            folds: config.folds,
            seed: config.seed,
            misc_included: config.include_misc,
            n_min: config.n_min,
            n_max: config.n_max,
            hyperparams: base_hp,
        },
        labels,
        class_distribution,
        per_class: pooled_metrics.per_class,
        micro: pooled_metrics.micro,
        weighted: pooled_metrics.weighted,
        accuracy: pooled_metrics.accuracy,
        zero_division: pooled_metrics.zero_division,
        confusion: pooled,
        fold_mean,
        folds: fold_reports,
    })
}

fn mean_of_folds(folds: &[FoldReport], labels: &[NELabel]) -> FoldMean {
    let n = folds.len() as f64;
    let mean_prf = |get: &dyn Fn(&Metrics) -> Prf| {
        let mut acc = Prf {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
        for f in folds {
            let p = get(&f.metrics);
            acc.precision += p.precision;
            acc.recall += p.recall;
            acc.f1 += p.f1;
        }
        Prf {
            precision: acc.precision / n,
            recall: acc.recall / n,
            f1: acc.f1 / n,
        }
    };
    let per_class = labels
        .iter()
        .map(|&l| {
            (
                l,
                mean_prf(&|m: &Metrics| {
                    let s = m.per_class[&l];
                    Prf {
                        precision: s.precision,
                        recall: s.recall,
                        f1: s.f1,
                    }
                }),
            )
        })
        .collect();
    FoldMean {
        per_class,
        micro: mean_prf(&|m: &Metrics| m.micro),
        weighted: mean_prf(&|m: &Metrics| m.weighted),
        accuracy: folds.iter().map(|f| f.metrics.accuracy).sum::<f64>() / n,
    }
}

/// One point of a learning curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub train_size: usize,
    pub accuracy: f64,
}

/// Fixed split used by the learning curve: fold 0 of the stratified split
/// is the test set, the remaining folds the training pool.
fn curve_split(
    items: &[&LabeledItem],
    config: &CvConfig,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    let gold: Vec<NELabel> = items.iter().map(|it| it.label).collect();
    let folds = stratified_kfold(&gold, config.folds, config.seed)?;
    let test = folds[0].clone();
    let train = complement(items.len(), &test);
    Ok((train, test))
}

/// Accuracy on the learning-curve test fold when training on the whole
/// training pool.
pub fn full_split_accuracy(
    corpus: &[LabeledItem],
    kind: ModelKind,
    config: &CvConfig,
) -> Result<f64, EvalError> {
    let items = active_items(corpus, config.include_misc);
    let labels = labels_present(&items);
    let (train, test) = curve_split(&items, config)?;
    let out = run_split(&items, &train, &test, &labels, kind, config, resolve_hyperparams(kind, config))?;
    Ok(metrics(&out.confusion)?.accuracy)
}

/// Accuracy on a fixed test fold as the training pool is subsampled.
///
/// Each class keeps `round(fraction * n_class)` of its training items, taken
/// as a prefix of one seeded shuffle so smaller subsamples are nested in
/// larger ones. The kept items stay in pool order, so fraction 1.0 trains on
/// exactly the full pool.
pub fn learning_curve(
    corpus: &[LabeledItem],
    fractions: &[f64],
    kind: ModelKind,
    config: &CvConfig,
) -> Result<Vec<CurvePoint>, EvalError> {
    let valid = !fractions.is_empty()
        && fractions.iter().all(|&f| f > 0.0 && f <= 1.0)
        && fractions.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(EvalError::BadFractions(fractions.to_vec()));
    }
    let items = active_items(corpus, config.include_misc);
    let labels = labels_present(&items);
    let (train, test) = curve_split(&items, config)?;
    let hp = resolve_hyperparams(kind, config);

    let mut rng = ChaCha8Rng::seed_from_u64(fold_seed(config.seed, usize::MAX));
    let mut rank = vec![usize::MAX; items.len()];
    let mut class_sizes: BTreeMap<NELabel, usize> = BTreeMap::new();
    for &label in &labels {
        let mut members: Vec<usize> = train
            .iter()
            .copied()
            .filter(|&i| items[i].label == label)
            .collect();
        members.shuffle(&mut rng);
        for (r, &i) in members.iter().enumerate() {
            rank[i] = r;
        }
        class_sizes.insert(label, members.len());
    }

    fractions
        .par_iter()
        .map(|&fraction| {
            let mut quota = BTreeMap::new();
            for (&label, &n) in &class_sizes {
                let k = (fraction * n as f64).round() as usize;
                if k == 0 {
                    return Err(EvalError::FractionTooSmall { fraction, label });
                }
                quota.insert(label, k);
            }
            let subset: Vec<usize> = train
                .iter()
                .copied()
                .filter(|&i| rank[i] < quota[&items[i].label])
                .collect();
            let out = run_split(&items, &subset, &test, &labels, kind, config, hp)?;
            Ok(CurvePoint {
                fraction,
                train_size: subset.len(),
                accuracy: metrics(&out.confusion)?.accuracy,
            })
        })
        .collect()
}

/// `fraction,accuracy` header plus one row per point.
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("fraction,accuracy\n");
    for p in points {
        s.push_str(&format!("{:?},{}\n", p.fraction, p.accuracy));
    }
    s
}
