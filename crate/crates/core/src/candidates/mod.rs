//! From link anchors to scored candidate entities.
//!
//! Anchors are deduplicated, tokenized, POS-tagged and mapped to wordtypes.
//! Each expression gets a binary POS score and a binary wordtype score; their
//! sum is the confidence, and any positive confidence selects the candidate.

mod tagger;
mod tokenize;
mod wordtype;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{collapse_whitespace, WikiLink};

pub use tagger::{CommandTagger, HeuristicTagger, PosTag, Tagger, TaggerSpec};
pub use tokenize::tokenize;
pub use wordtype::{wordtype, wordtype_qualifies, wordtype_score, Aggregation};

#[derive(Debug, Error)]
pub enum CandidateError {
    #[error("surface {0:?} has no tokens")]
    EmptySurface(String),
    #[error("unknown POS tag {0:?}")]
    UnknownTag(String),
    #[error("lexicon line {0}: expected token<TAB>tag, got {1:?}")]
    Lexicon(usize, String),
    #[error("external tagger: {0}")]
    TaggerProtocol(String),
    #[error("candidate record violates invariant: {0}")]
    Invariant(String),
    #[error("malformed record at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub pos_tag: PosTag,
}

/// Aggregation switches for the two sub-scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub pos_agg: Aggregation,
    pub wt_agg: Aggregation,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            pos_agg: Aggregation::Any,
            wt_agg: Aggregation::All,
        }
    }
}

/// 1 when the aggregated tags include a nominal tag (NNP, NNS, NN).
pub fn pos_score(tags: &[PosTag], agg: Aggregation) -> u8 {
    u8::from(agg.combine(tags.iter().map(|t| t.is_nominal())))
}

/// A deduplicated probable entity with its scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CandidateRecord", try_from = "CandidateRecord")]
pub struct Candidate {
    pub surface: String,
    pub tokens: Vec<Token>,
    pub wordtypes: Vec<String>,
    pub pos_score: u8,
    pub wordtype_score: u8,
    pub confidence: u8,
    pub selected: bool,
    pub occurrence_count: usize,
}

impl Candidate {
    /// Scores one surface form.
    pub fn score(
        surface: &str,
        occurrence_count: usize,
        tags: Vec<PosTag>,
        tokens: Vec<String>,
        config: ScoringConfig,
    ) -> Candidate {
        debug_assert_eq!(tags.len(), tokens.len());
        let wordtypes: Vec<String> = tokens.iter().map(|t| wordtype(t)).collect();
        let pos = pos_score(&tags, config.pos_agg);
        let wt = wordtype_score(&wordtypes, config.wt_agg);
        let confidence = pos + wt;
        Candidate {
            surface: surface.to_string(),
            tokens: tokens
                .into_iter()
                .zip(tags)
                .map(|(text, pos_tag)| Token { text, pos_tag })
                .collect(),
            wordtypes,
            pos_score: pos,
            wordtype_score: wt,
            confidence,
            selected: confidence >= 1,
            occurrence_count,
        }
    }

    pub fn tags(&self) -> Vec<PosTag> {
        self.tokens.iter().map(|t| t.pos_tag).collect()
    }
}

/// Flat on-disk shape of a [`Candidate`].
#[derive(Serialize, Deserialize)]
struct CandidateRecord {
    surface: String,
    tokens: Vec<String>,
    tags: Vec<PosTag>,
    wordtypes: Vec<String>,
    pos_score: u8,
    wordtype_score: u8,
    confidence: u8,
    selected: bool,
    occurrence_count: usize,
}

impl From<Candidate> for CandidateRecord {
    fn from(c: Candidate) -> Self {
        let (tokens, tags) = c.tokens.into_iter().map(|t| (t.text, t.pos_tag)).unzip();
        CandidateRecord {
            surface: c.surface,
            tokens,
            tags,
            wordtypes: c.wordtypes,
            pos_score: c.pos_score,
            wordtype_score: c.wordtype_score,
            confidence: c.confidence,
            selected: c.selected,
            occurrence_count: c.occurrence_count,
        }
    }
}

impl TryFrom<CandidateRecord> for Candidate {
    type Error = CandidateError;

    fn try_from(r: CandidateRecord) -> Result<Self, Self::Error> {
        let bad = |m: &str| Err(CandidateError::Invariant(format!("{}: {m}", r.surface)));
        if r.tokens.len() != r.tags.len() || r.tokens.len() != r.wordtypes.len() {
            return bad("tokens, tags and wordtypes differ in length");
        }
        if r.pos_score > 1 || r.wordtype_score > 1 {
            return bad("sub-scores must be 0 or 1");
        }
        if r.confidence != r.pos_score + r.wordtype_score {
            return bad("confidence is not the sum of the sub-scores");
        }
        if r.selected != (r.confidence >= 1) {
            return bad("selected disagrees with confidence");
        }
        if r.occurrence_count == 0 {
            return bad("occurrence_count must be positive");
        }
        Ok(Candidate {
            surface: r.surface,
            tokens: r
                .tokens
                .into_iter()
                .zip(r.tags)
                .map(|(text, pos_tag)| Token { text, pos_tag })
                .collect(),
            wordtypes: r.wordtypes,
            pos_score: r.pos_score,
            wordtype_score: r.wordtype_score,
            confidence: r.confidence,
            selected: r.selected,
            occurrence_count: r.occurrence_count,
        })
    }
}

/// Exact, case-sensitive duplicate removal. Output is sorted by surface.
pub fn dedup<S: AsRef<str>>(anchors: &[S]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in anchors {
        *counts.entry(a.as_ref()).or_default() += 1;
    }
    counts.into_iter().map(|(s, n)| (s.to_string(), n)).collect()
}

/// A deduplicated surface with the links it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceGroup {
    pub surface: String,
    pub occurrence_count: usize,
    pub provenance: Vec<(String, String)>,
}

/// Groups links by whitespace-normalized anchor text.
pub fn group_links(links: &[WikiLink]) -> Vec<SurfaceGroup> {
    let mut groups: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for link in links {
        let surface = collapse_whitespace(&link.anchor_text);
        if surface.is_empty() {
            continue;
        }
        groups
            .entry(surface)
            .or_default()
            .push((link.source_title.clone(), link.target_title.clone()));
    }
    groups
        .into_iter()
        .map(|(surface, mut provenance)| {
            let occurrence_count = provenance.len();
            provenance.sort();
            provenance.dedup();
            SurfaceGroup {
                surface,
                occurrence_count,
                provenance,
            }
        })
        .collect()
}

/// Tokenizes, tags and scores each deduplicated surface; output order
/// follows input order.
pub fn score_candidates(
    surfaces: &[(String, usize)],
    tagger: &dyn Tagger,
    config: ScoringConfig,
) -> Result<Vec<Candidate>, CandidateError> {
    let tokenized: Vec<Vec<String>> = surfaces
        .par_iter()
        .map(|(s, _)| tokenize(s))
        .collect::<Result<_, _>>()?;
    let tags = tagger.tag_batch(&tokenized)?;
    Ok(surfaces
        .par_iter()
        .zip(tokenized)
        .zip(tags)
        .map(|(((surface, count), tokens), tags)| {
            Candidate::score(surface, *count, tags, tokens, config)
        })
        .collect())
}

/// A scored candidate plus the links that produced it: one line of
/// `scored.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    #[serde(flatten)]
    pub candidate: Candidate,
    pub provenance: Vec<(String, String)>,
}

/// Scores grouped surfaces. Surfaces that tokenize to nothing are
/// returned separately rather than aborting the run.
pub fn score_groups(
    groups: &[SurfaceGroup],
    tagger: &dyn Tagger,
    config: ScoringConfig,
) -> Result<(Vec<ScoredCandidate>, Vec<String>), CandidateError> {
    let mut rejected = Vec::new();
    let mut kept = Vec::new();
    for g in groups {
        if tokenize(&g.surface).is_ok() {
            kept.push(g);
        } else {
            rejected.push(g.surface.clone());
        }
    }
    let pairs: Vec<(String, usize)> = kept
        .iter()
        .map(|g| (g.surface.clone(), g.occurrence_count))
        .collect();
    let scored = score_candidates(&pairs, tagger, config)?;
    let out = scored
        .into_iter()
        .zip(kept)
        .map(|(candidate, g)| ScoredCandidate {
            candidate,
            provenance: g.provenance.clone(),
        })
        .collect();
    Ok((out, rejected))
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead, T: serde::de::DeserializeOwned>(
    input: R,
) -> Result<Vec<T>, CandidateError> {
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(
            serde_json::from_str(&line).map_err(|e| CandidateError::Format {
                line: i + 1,
                reason: e.to_string(),
            })?,
        );
    }
    Ok(items)
}
