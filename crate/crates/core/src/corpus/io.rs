use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusError, EntityRecord, NELabel};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Tsv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(CorpusFormat::Tsv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(format!("unknown corpus format {other:?} (tsv|jsonl)")),
        }
    }
}

/// Serializes labeled records sorted by surface. TSV lines are
/// `surface<TAB>LABEL`; JSONL lines are whole records.
pub fn export_corpus(records: &[EntityRecord], format: CorpusFormat) -> Result<String, CorpusError> {
    let unlabeled: Vec<String> = records
        .iter()
        .filter(|r| r.final_label.is_none())
        .map(|r| r.id.clone())
        .collect();
    if !unlabeled.is_empty() {
        return Err(CorpusError::UnlabeledRecord(unlabeled));
    }
    let mut sorted: Vec<&EntityRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.surface.cmp(&b.surface));
    let mut out = String::new();
    for r in sorted {
        match format {
            CorpusFormat::Tsv => {
                if r.surface.contains(['\t', '\n', '\r']) {
                    return Err(CorpusError::UnwritableSurface(r.surface.clone()));
                }
                let label = r.final_label.expect("checked above");
                out.push_str(&r.surface);
                out.push('\t');
                out.push_str(label.as_str());
                out.push('\n');
            }
            CorpusFormat::Jsonl => {
                out.push_str(&serde_json::to_string(r).expect("records serialize"));
                out.push('\n');
            }
        }
    }
    Ok(out)
}

pub fn import_corpus(text: &str, format: CorpusFormat) -> Result<Vec<EntityRecord>, CorpusError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record = match format {
            CorpusFormat::Tsv => parse_tsv_line(line, line_no)?,
            CorpusFormat::Jsonl => {
                serde_json::from_str(line).map_err(|e| CorpusError::ParseError {
                    line: line_no,
                    reason: e.to_string(),
                })?
            }
        };
        if !seen.insert(record.surface.clone()) {
            return Err(CorpusError::DuplicateSurface(record.surface));
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_tsv_line(line: &str, line_no: usize) -> Result<EntityRecord, CorpusError> {
    let err = |reason: String| CorpusError::ParseError {
        line: line_no,
        reason,
    };
    let mut fields = line.split('\t');
    let (Some(surface), Some(label), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(err("expected exactly two tab-separated fields".into()));
    };
    if surface.is_empty() || surface != surface.trim() {
        return Err(err(format!("surface {surface:?} is empty or padded")));
    }
    let label: NELabel = label
        .parse()
        .map_err(|e: CorpusError| err(e.to_string()))?;
    Ok(EntityRecord::labeled(surface, label))
}

pub fn write_corpus_file(
    path: &Path,
    records: &[EntityRecord],
    format: CorpusFormat,
) -> Result<(), CorpusError> {
    let text = export_corpus(records, format)?;
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

pub fn read_corpus_file(path: &Path, format: CorpusFormat) -> Result<Vec<EntityRecord>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    import_corpus(&text, format)
}
