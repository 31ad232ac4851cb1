use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ProjectError;
use crate::candidates::{Aggregation, ScoringConfig, TaggerSpec};
use crate::eval::{CvConfig, ModelKind};
use crate::ingest::ContentKind;

pub const CONFIG_FILE: &str = "wikiner.toml";
pub const ENV_PREFIX: &str = "WIKINER_";

/// `wikiner.toml` in the project root. The project directory itself is
/// wherever the file lives, so it is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectConfig {
    pub project: ProjectSection,
    pub fetch: FetchSection,
    pub candidates: CandidateSection,
    pub eval: EvalSection,
    pub service: ServiceSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectSection {
    /// Relative paths resolve against the project directory.
    pub seed_list: PathBuf,
}

impl Default for ProjectSection {
    fn default() -> Self {
        ProjectSection {
            seed_list: PathBuf::from("seeds.txt"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FetchSection {
    pub base_url: String,
    pub content_kind: ContentKind,
    pub politeness_delay_ms: u64,
}

impl Default for FetchSection {
    fn default() -> Self {
        FetchSection {
            base_url: "https://en.wikipedia.org".to_string(),
            content_kind: ContentKind::Wikitext,
            politeness_delay_ms: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CandidateSection {
    pub tagger: TaggerSpec,
    pub pos_agg: Aggregation,
    pub wt_agg: Aggregation,
}

impl Default for CandidateSection {
    fn default() -> Self {
        let scoring = ScoringConfig::default();
        CandidateSection {
            tagger: TaggerSpec::Heuristic,
            pos_agg: scoring.pos_agg,
            wt_agg: scoring.wt_agg,
        }
    }
}

impl CandidateSection {
    pub fn scoring(&self) -> ScoringConfig {
        ScoringConfig {
            pos_agg: self.pos_agg,
            wt_agg: self.wt_agg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub model: ModelKind,
    pub folds: usize,
    pub seed: u64,
    pub include_misc: bool,
    pub n_min: usize,
    pub n_max: usize,
    pub fractions: Vec<f64>,
}

impl Default for EvalSection {
    fn default() -> Self {
        let cv = CvConfig::default();
        EvalSection {
            model: ModelKind::LogisticRegression,
            folds: cv.folds,
            seed: cv.seed,
            include_misc: cv.include_misc,
            n_min: cv.n_min,
            n_max: cv.n_max,
            fractions: vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

impl EvalSection {
    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            folds: self.folds,
            seed: self.seed,
            include_misc: self.include_misc,
            n_min: self.n_min,
            n_max: self.n_max,
            hyperparams: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceSection {
    pub host: String,
    pub port: u16,
    /// The first two are the primary annotators; later ids are observers.
    pub annotators: Vec<String>,
}

impl Default for ServiceSection {
    fn default() -> Self {
        ServiceSection {
            host: "127.0.0.1".to_string(),
            port: 8750,
            annotators: vec!["annotator1".to_string(), "annotator2".to_string()],
        }
    }
}

impl ProjectConfig {
    pub fn from_toml(text: &str) -> Result<Self, ProjectError> {
        toml::from_str(text).map_err(|e| ProjectError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `wikiner.toml` from `dir` (defaults when absent) and applies
    /// `WIKINER_<SECTION>_<KEY>` overrides from the process environment.
    pub fn load(dir: &Path) -> Result<Self, ProjectError> {
        Self::load_with_env(dir, std::env::vars())
    }

    pub fn load_with_env(
        dir: &Path,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ProjectError> {
        let path = dir.join(CONFIG_FILE);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(ProjectError::Io(e)),
        };
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ProjectError::Config(format!("{}: {e}", path.display())))?;
        apply_env(&mut table, vars)?;
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ProjectError::Config(e.to_string()))
    }
}

const SECTIONS: [&str; 5] = ["project", "fetch", "candidates", "eval", "service"];

/// Values are parsed as TOML when they can be (`5`, `true`, `["a","b"]`)
/// and taken as plain strings otherwise.
fn apply_env(
    table: &mut toml::Table,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<(), ProjectError> {
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = SECTIONS.iter().find_map(|s| {
            rest.strip_prefix(s)
                .and_then(|r| r.strip_prefix('_'))
                .filter(|k| !k.is_empty())
                .map(|k| (*s, k.to_string()))
        }) else {
            // RUST_LOG-style variables of our own (e.g. WIKINER_LOG) are not config
            continue;
        };
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(toml::Value::String(raw));
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key, value);
            }
            _ => return Err(ProjectError::Config(format!("[{section}] is not a table"))),
        }
    }
    Ok(())
}
