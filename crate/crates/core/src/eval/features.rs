use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// All contiguous character windows of length `n_min..=n_max`, spaces and
/// case kept. Windows longer than the surface are skipped.
pub fn char_ngrams(surface: &str, n_min: usize, n_max: usize) -> BTreeMap<String, usize> {
    assert!(n_min >= 1 && n_min <= n_max, "need 1 <= n_min <= n_max");
    let chars: Vec<char> = surface.chars().collect();
    let mut grams = BTreeMap::new();
    for n in n_min..=n_max.min(chars.len()) {
        for w in chars.windows(n) {
            *grams.entry(w.iter().collect::<String>()).or_insert(0) += 1;
        }
    }
    grams
}

/// Feature index → positive count, sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds from unsorted pairs; zero counts are dropped and repeated
    /// indices summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut map: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert(0.0) += v;
        }
        SparseVector {
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| dense[i] * v).sum()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }
}

/// N-gram vocabulary fitted on training surfaces only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub n_min: usize,
    pub n_max: usize,
    vocabulary: HashMap<String, usize>,
    frozen: bool,
}

impl FeatureSpace {
    pub fn new(n_min: usize, n_max: usize) -> Self {
        assert!(n_min >= 1 && n_min <= n_max, "need 1 <= n_min <= n_max");
        FeatureSpace {
            n_min,
            n_max,
            vocabulary: HashMap::new(),
            frozen: false,
        }
    }

    /// Vocabulary of every n-gram in `surfaces`, indices assigned in sorted
    /// n-gram order, then frozen.
    pub fn fit<S: AsRef<str>>(surfaces: &[S], n_min: usize, n_max: usize) -> Self {
        let mut grams = BTreeSet::new();
        for s in surfaces {
            grams.extend(char_ngrams(s.as_ref(), n_min, n_max).into_keys());
        }
        FeatureSpace {
            n_min,
            n_max,
            vocabulary: grams.into_iter().enumerate().map(|(i, g)| (g, i)).collect(),
            frozen: true,
        }
    }

    /// Adds the surface's n-grams to an unfrozen space.
    pub fn observe(&mut self, surface: &str) -> Result<(), EvalError> {
        if self.frozen {
            return Err(EvalError::SpaceFrozen);
        }
        for g in char_ngrams(surface, self.n_min, self.n_max).into_keys() {
            let next = self.vocabulary.len();
            self.vocabulary.entry(g).or_insert(next);
        }
        Ok(())
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn index_of(&self, gram: &str) -> Option<usize> {
        self.vocabulary.get(gram).copied()
    }

    pub fn grams(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.keys().map(String::as_str)
    }

    /// Counts of in-vocabulary n-grams; unseen n-grams are dropped.
    pub fn featurize(&self, surface: &str) -> Result<SparseVector, EvalError> {
        if !self.frozen {
            return Err(EvalError::SpaceNotFrozen);
        }
        Ok(SparseVector::from_pairs(
            char_ngrams(surface, self.n_min, self.n_max)
                .into_iter()
                .filter_map(|(g, c)| self.vocabulary.get(&g).map(|&i| (i, c as f64))),
        ))
    }
}
