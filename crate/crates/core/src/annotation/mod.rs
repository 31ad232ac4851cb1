//! Two-annotator labeling workflow.
//!
//! State is derived from an append-only journal of label and adjudication
//! events; replaying the journal over the same entity set rebuilds the same
//! state. Two primary annotators count toward agreement, any further roster
//! members are observers whose labels are recorded but otherwise ignored.

mod agreement;
pub mod http;
mod journal;

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{EntityRecord, NELabel};

pub use agreement::{agreement_stats, AgreementReport, Disagreement};
pub use journal::{read_events, Journal, JournalEvent};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error("invalid label {0:?} (expected PER, LOC, ORG or MISC)")]
    InvalidLabel(String),
    #[error("agreement needs two primary annotators, roster has {0}")]
    NotEnoughAnnotators(usize),
    #[error("entity {0:?} is not in the disagreement list")]
    NotDisagreed(String),
    #[error("{} entities are unresolved: {}", .0.len(), .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("duplicate annotator {0:?} in roster")]
    DuplicateAnnotator(String),
    #[error("journal line {line}: {reason}")]
    Journal { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AnnotationError {
    /// Stable machine-readable name, used as the API error code.
    pub fn code(&self) -> &'static str {
        match self {
            AnnotationError::UnknownAnnotator(_) => "UnknownAnnotator",
            AnnotationError::UnknownEntity(_) => "UnknownEntity",
            AnnotationError::InvalidLabel(_) => "InvalidLabel",
            AnnotationError::NotEnoughAnnotators(_) => "NotEnoughAnnotators",
            AnnotationError::NotDisagreed(_) => "NotDisagreed",
            AnnotationError::Unresolved(_) => "Unresolved",
            AnnotationError::DuplicateAnnotator(_) => "DuplicateAnnotator",
            AnnotationError::Journal { .. } => "JournalCorrupt",
            AnnotationError::Io(_) => "Internal",
        }
    }
}

/// Annotator ids in roster order; the first two are the primaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster(Vec<String>);

impl Roster {
    pub fn new<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self, AnnotationError> {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(AnnotationError::DuplicateAnnotator(id.clone()));
            }
        }
        Ok(Roster(ids))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.iter().any(|a| a == id)
    }

    pub fn primaries(&self) -> Option<(&str, &str)> {
        match self.0.as_slice() {
            [a, b, ..] => Some((a, b)),
            _ => None,
        }
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acknowledgement {
    pub entity_id: String,
    pub label: NELabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator: Option<String>,
    /// Replaced an earlier label by the same annotator.
    pub replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatorProgress {
    pub labeled: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub annotators: BTreeMap<String, AnnotatorProgress>,
    pub entities: usize,
    pub events: usize,
    pub pending_disagreements: usize,
    pub adjudicated: usize,
}

/// Derived workflow state plus an optional journal sink.
#[derive(Debug)]
pub struct AnnotationService {
    roster: Roster,
    /// Entities ordered by surface.
    entities: Vec<EntityRecord>,
    by_id: HashMap<String, usize>,
    adjudications: HashMap<String, NELabel>,
    events: Vec<JournalEvent>,
    journal: Option<Journal>,
}

impl AnnotationService {
    /// In-memory service; nothing is persisted.
    pub fn new(entities: Vec<EntityRecord>, roster: Roster) -> Self {
        let mut entities = entities;
        entities.sort_by(|a, b| a.surface.cmp(&b.surface));
        for e in &mut entities {
            e.annotations.clear();
            e.adjudication = None;
            e.final_label = None;
        }
        let by_id = entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        AnnotationService {
            roster,
            entities,
            by_id,
            adjudications: HashMap::new(),
            events: Vec::new(),
            journal: None,
        }
    }

    /// Opens (or creates) a journal and replays it.
    pub fn with_journal(
        entities: Vec<EntityRecord>,
        roster: Roster,
        journal_path: &Path,
    ) -> Result<Self, AnnotationError> {
        let (journal, events) = Journal::open(journal_path)?;
        let mut svc = Self::replay(entities, roster, events)?;
        svc.journal = Some(journal);
        Ok(svc)
    }

    /// Rebuilds state from an event sequence.
    pub fn replay(
        entities: Vec<EntityRecord>,
        roster: Roster,
        events: impl IntoIterator<Item = JournalEvent>,
    ) -> Result<Self, AnnotationError> {
        let mut svc = Self::new(entities, roster);
        for event in events {
            svc.apply(&event)?;
            svc.events.push(event);
        }
        Ok(svc)
    }

    fn apply(&mut self, event: &JournalEvent) -> Result<(), AnnotationError> {
        match event {
            JournalEvent::Label {
                entity_id,
                annotator_id,
                label,
                ..
            } => {
                if !self.roster.contains(annotator_id) {
                    return Err(AnnotationError::UnknownAnnotator(annotator_id.clone()));
                }
                let idx = self.index_of(entity_id)?;
                self.entities[idx]
                    .annotations
                    .insert(annotator_id.clone(), *label);
            }
            JournalEvent::Adjudication {
                entity_id, label, ..
            } => {
                let idx = self.index_of(entity_id)?;
                self.entities[idx].adjudication = Some(*label);
                self.adjudications.insert(entity_id.clone(), *label);
            }
        }
        Ok(())
    }

    fn index_of(&self, entity_id: &str) -> Result<usize, AnnotationError> {
        self.by_id
            .get(entity_id)
            .copied()
            .ok_or_else(|| AnnotationError::UnknownEntity(entity_id.to_string()))
    }

    fn record(&mut self, event: JournalEvent) -> Result<(), AnnotationError> {
        if let Some(j) = self.journal.as_mut() {
            j.append(&event)?;
        }
        self.apply(&event)?;
        self.events.push(event);
        Ok(())
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn entities(&self) -> &[EntityRecord] {
        &self.entities
    }

    pub fn entity(&self, entity_id: &str) -> Option<&EntityRecord> {
        self.by_id.get(entity_id).map(|&i| &self.entities[i])
    }

    pub fn events(&self) -> &[JournalEvent] {
        &self.events
    }

    fn check_annotator(&self, annotator_id: &str) -> Result<(), AnnotationError> {
        if self.roster.contains(annotator_id) {
            Ok(())
        } else {
            Err(AnnotationError::UnknownAnnotator(annotator_id.to_string()))
        }
    }

    /// Lowest-surface entity the annotator has not labeled yet.
    pub fn next_task(&self, annotator_id: &str) -> Result<Option<&EntityRecord>, AnnotationError> {
        self.check_annotator(annotator_id)?;
        Ok(self
            .entities
            .iter()
            .find(|e| !e.annotations.contains_key(annotator_id)))
    }

    pub fn submit_label(
        &mut self,
        annotator_id: &str,
        entity_id: &str,
        label: &str,
    ) -> Result<Acknowledgement, AnnotationError> {
        self.check_annotator(annotator_id)?;
        let idx = self.index_of(entity_id)?;
        let label: NELabel = label
            .parse()
            .map_err(|_| AnnotationError::InvalidLabel(label.to_string()))?;
        let replaced = self.entities[idx].annotations.contains_key(annotator_id);
        self.record(JournalEvent::Label {
            entity_id: entity_id.to_string(),
            annotator_id: annotator_id.to_string(),
            label,
            submitted_at: Utc::now(),
        })?;
        Ok(Acknowledgement {
            entity_id: entity_id.to_string(),
            label,
            annotator: Some(annotator_id.to_string()),
            replaced,
        })
    }

    fn primary_labels(&self, e: &EntityRecord) -> Option<(NELabel, NELabel)> {
        let (a, b) = self.roster.primaries()?;
        Some((*e.annotations.get(a)?, *e.annotations.get(b)?))
    }

    fn is_disagreed(&self, e: &EntityRecord) -> bool {
        matches!(self.primary_labels(e), Some((x, y)) if x != y)
    }

    fn disagreement(&self, e: &EntityRecord) -> Disagreement {
        let (a, b) = self.roster.primaries().expect("caller checked primaries");
        Disagreement {
            entity_id: e.id.clone(),
            surface: e.surface.clone(),
            labels: [a, b]
                .into_iter()
                .filter_map(|id| e.annotations.get(id).map(|&l| (id.to_string(), l)))
                .collect(),
            adjudicated: self.adjudications.get(&e.id).copied(),
        }
    }

    pub fn agreement(&self) -> Result<AgreementReport, AnnotationError> {
        let (a, b) = self
            .roster
            .primaries()
            .ok_or(AnnotationError::NotEnoughAnnotators(self.roster.ids().len()))?;
        let pairs: Vec<(NELabel, NELabel)> = self
            .entities
            .iter()
            .filter_map(|e| self.primary_labels(e))
            .collect();
        let disagreements = self
            .entities
            .iter()
            .filter(|e| self.is_disagreed(e))
            .map(|e| self.disagreement(e))
            .collect();
        let annotators = (a.to_string(), b.to_string());
        Ok(match agreement_stats(&pairs) {
            Some((n, agree, pct, kappa)) => AgreementReport {
                annotators,
                n_labeled_by_both: n,
                n_agree: agree,
                percent_agreement: pct,
                kappa,
                empty: false,
                disagreements,
            },
            None => AgreementReport {
                annotators,
                n_labeled_by_both: 0,
                n_agree: 0,
                percent_agreement: 0.0,
                kappa: 0.0,
                empty: true,
                disagreements,
            },
        })
    }

    /// Disagreements still waiting for adjudication.
    pub fn pending_disagreements(&self) -> Result<Vec<Disagreement>, AnnotationError> {
        if self.roster.primaries().is_none() {
            return Err(AnnotationError::NotEnoughAnnotators(self.roster.ids().len()));
        }
        Ok(self
            .entities
            .iter()
            .filter(|e| self.is_disagreed(e) && !self.adjudications.contains_key(&e.id))
            .map(|e| self.disagreement(e))
            .collect())
    }

    pub fn adjudicate(
        &mut self,
        entity_id: &str,
        label: &str,
    ) -> Result<Acknowledgement, AnnotationError> {
        let idx = self.index_of(entity_id)?;
        let label: NELabel = label
            .parse()
            .map_err(|_| AnnotationError::InvalidLabel(label.to_string()))?;
        if !self.is_disagreed(&self.entities[idx]) {
            return Err(AnnotationError::NotDisagreed(entity_id.to_string()));
        }
        let replaced = self.adjudications.contains_key(entity_id);
        self.record(JournalEvent::Adjudication {
            entity_id: entity_id.to_string(),
            label,
            submitted_at: Utc::now(),
        })?;
        Ok(Acknowledgement {
            entity_id: entity_id.to_string(),
            label,
            annotator: None,
            replaced,
        })
    }

    fn resolved_label(&self, e: &EntityRecord) -> Option<NELabel> {
        match self.primary_labels(e)? {
            (x, y) if x == y => Some(x),
            _ => self.adjudications.get(&e.id).copied(),
        }
    }

    /// Labeled corpus: agreed labels where the primaries agree, adjudicated
    /// labels otherwise. Fails listing every entity that is neither.
    pub fn finalize(&self) -> Result<Vec<EntityRecord>, AnnotationError> {
        if self.roster.primaries().is_none() {
            return Err(AnnotationError::NotEnoughAnnotators(self.roster.ids().len()));
        }
        let mut unresolved = Vec::new();
        let mut out = Vec::with_capacity(self.entities.len());
        for e in &self.entities {
            match self.resolved_label(e) {
                Some(label) => {
                    let mut r = e.clone();
                    r.final_label = Some(label);
                    out.push(r);
                }
                None => unresolved.push(e.id.clone()),
            }
        }
        if unresolved.is_empty() {
            Ok(out)
        } else {
            Err(AnnotationError::Unresolved(unresolved))
        }
    }

    pub fn progress(&self) -> Progress {
        let total = self.entities.len();
        let annotators = self
            .roster
            .ids()
            .iter()
            .map(|id| {
                let labeled = self
                    .entities
                    .iter()
                    .filter(|e| e.annotations.contains_key(id))
                    .count();
                (id.clone(), AnnotatorProgress { labeled, total })
            })
            .collect();
        let pending = self.pending_disagreements().map_or(0, |d| d.len());
        Progress {
            annotators,
            entities: total,
            events: self.events.len(),
            pending_disagreements: pending,
            adjudicated: self.adjudications.len(),
        }
    }

    pub fn journal_path(&self) -> Option<&Path> {
        self.journal.as_ref().map(|j| j.path())
    }
}

/// Timestamp helper for building events by hand.
pub fn event_time(rfc3339: &str) -> DateTime<Utc> {
    DateTime::parse_from_rfc3339(rfc3339)
        .expect("valid RFC 3339 timestamp")
        .with_timezone(&Utc)
}
