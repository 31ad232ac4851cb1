//! Entity records, corpus statistics and corpus files.

mod io;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::candidates::{Candidate, ScoredCandidate};

pub use io::{export_corpus, import_corpus, read_corpus_file, write_corpus_file, CorpusFormat};
pub use stats::{class_counts, compute_stats, compute_stats_from_classes, CorpusStats, PipelineCounts};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("inconsistent pipeline counts: links {links} >= probable {probable} >= selected {selected} does not hold")]
    InconsistentCounts {
        links: usize,
        probable: usize,
        selected: usize,
    },
    #[error("records without a final label: {}", .0.join(", "))]
    UnlabeledRecord(Vec<String>),
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("duplicate surface {0:?}")]
    DuplicateSurface(String),
    #[error("invalid label {0:?} (expected PER, LOC, ORG or MISC)")]
    InvalidLabel(String),
    #[error("surface {0:?} contains a tab or line break and cannot be written as TSV")]
    UnwritableSurface(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// CoNLL-2003 entity classes. The derive order is the tie-break order used
/// everywhere a label ranking is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NELabel {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "MISC")]
    Misc,
}

impl NELabel {
    pub const ALL: [NELabel; 4] = [NELabel::Per, NELabel::Loc, NELabel::Org, NELabel::Misc];

    pub fn as_str(self) -> &'static str {
        match self {
            NELabel::Per => "PER",
            NELabel::Loc => "LOC",
            NELabel::Org => "ORG",
            NELabel::Misc => "MISC",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NELabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NELabel {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PER" => Ok(NELabel::Per),
            "LOC" => Ok(NELabel::Loc),
            "ORG" => Ok(NELabel::Org),
            "MISC" => Ok(NELabel::Misc),
            other => Err(CorpusError::InvalidLabel(other.to_string())),
        }
    }
}

/// Stable identifier derived from the surface form alone.
pub fn entity_id(surface: &str) -> String {
    let digest = Sha256::digest(surface.as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Candidate>,
    #[serde(default)]
    pub annotations: BTreeMap<String, NELabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjudication: Option<NELabel>,
    pub final_label: Option<NELabel>,
    #[serde(default)]
    pub provenance: Vec<(String, String)>,
}

impl EntityRecord {
    pub fn new(surface: &str) -> Self {
        EntityRecord {
            id: entity_id(surface),
            surface: surface.to_string(),
            candidate: None,
            annotations: BTreeMap::new(),
            adjudication: None,
            final_label: None,
            provenance: Vec::new(),
        }
    }

    pub fn labeled(surface: &str, label: NELabel) -> Self {
        EntityRecord {
            final_label: Some(label),
            ..Self::new(surface)
        }
    }

    pub fn from_scored(scored: &ScoredCandidate) -> Self {
        EntityRecord {
            candidate: Some(scored.candidate.clone()),
            provenance: scored.provenance.clone(),
            ..Self::new(&scored.candidate.surface)
        }
    }

    /// A final label must be backed by agreeing primary annotators or by an
    /// adjudication carrying the same label.
    pub fn final_label_is_justified(&self, primaries: (&str, &str)) -> bool {
        let Some(label) = self.final_label else {
            return true;
        };
        if self.adjudication == Some(label) {
            return true;
        }
        self.annotations.get(primaries.0) == Some(&label)
            && self.annotations.get(primaries.1) == Some(&label)
    }
}
