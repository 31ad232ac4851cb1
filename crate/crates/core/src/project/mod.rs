//! A project directory holding one file per pipeline stage:
//!
//! ```text
//! wikiner.toml        config
//! seeds.txt           category page titles or URLs
//! pages/              cached raw pages                  (fetch)
//! links.jsonl         extracted wikilinks               (extract)
//! candidates.jsonl    deduplicated anchor surfaces      (candidates)
//! scored.jsonl        tagged and scored candidates      (score)
//! stats.json          pipeline counts and class table   (stats)
//! annotations.jsonl   annotation event journal          (serve, adjudicate)
//! agreement.json      inter-annotator agreement         (agreement)
//! corpus.tsv/.jsonl   final labeled corpus              (finalize)
//! report.json         cross-validation report           (evaluate)
//! learning_curve.csv  accuracy by training fraction     (learning-curve)
//! ```

mod cli;
mod config;

use std::fs::{self, File};
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use thiserror::Error;

use crate::annotation::http::{serve_blocking, ServerOptions};
use crate::annotation::{
    Acknowledgement, AgreementReport, AnnotationError, AnnotationService, Disagreement,
    Roster,
};
use crate::candidates::{
    group_links, read_jsonl, score_groups, write_jsonl, CandidateError, ScoredCandidate, ScoringConfig,
    SurfaceGroup, TaggerSpec,
};
use crate::corpus::{
    compute_stats, export_corpus, read_corpus_file, write_corpus_file, CorpusError, CorpusFormat,
    CorpusStats, EntityRecord, PipelineCounts,
};
use crate::eval::{
    cross_validate, curve_to_csv, learning_curve, CurvePoint, CvConfig, EvalError, EvalReport, LabeledItem,
    ModelKind,
};
use crate::fsutil::write_atomic;
use crate::ingest::{
    extract_links, load_links, normalize_title, parse_seed_list, write_links_jsonl, ContentKind, FetchConfig,
    Fetcher, IngestError, PageCache, RawPage, WikiLink,
};

pub use cli::{run, run_with, Cli, Command, EvalArgs};
pub use config::{
    CandidateSection, EvalSection, FetchSection, ProjectConfig, ProjectSection, ServiceSection, CONFIG_FILE,
    ENV_PREFIX,
};

pub const PAGES_DIR: &str = "pages";
pub const LINKS_FILE: &str = "links.jsonl";
pub const CANDIDATES_FILE: &str = "candidates.jsonl";
pub const SCORED_FILE: &str = "scored.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const JOURNAL_FILE: &str = "annotations.jsonl";
pub const AGREEMENT_FILE: &str = "agreement.json";
pub const CORPUS_TSV: &str = "corpus.tsv";
pub const CORPUS_JSONL: &str = "corpus.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_NO_MISC_FILE: &str = "report_without_misc.json";
pub const CURVE_FILE: &str = "learning_curve.csv";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("{file} not found; run `wikiner {producer}` first")]
    MissingStageInput { file: String, producer: &'static str },
    #[error("project directory {0} does not exist; run `wikiner init` first")]
    NotAProject(PathBuf),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Candidate(#[from] CandidateError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ProjectError {
    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProjectError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = ProjectError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchSummary {
    pub requested: usize,
    pub imported: usize,
    pub cached: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractSummary {
    pub pages: usize,
    pub links: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreSummary {
    pub scored: usize,
    pub selected: usize,
    pub rejected: Vec<String>,
}

pub struct Project {
    root: PathBuf,
    config: ProjectConfig,
}

impl Project {
    /// Creates the directory, a default `wikiner.toml` and an empty seed
    /// list. Existing files are left alone.
    pub fn init(dir: &Path) -> Result<Project> {
        fs::create_dir_all(dir)?;
        let cfg_path = dir.join(CONFIG_FILE);
        if !cfg_path.exists() {
            write_atomic(&cfg_path, ProjectConfig::default().to_toml().as_bytes())?;
        }
        let project = Project::open(dir)?;
        let seeds = project.resolve(&project.config.project.seed_list);
        if !seeds.exists() {
            write_atomic(
                &seeds,
                b"# one category page per line: a title or a /wiki/ URL\n",
            )?;
        }
        Ok(project)
    }

    pub fn open(dir: &Path) -> Result<Project> {
        if !dir.is_dir() {
            return Err(ProjectError::NotAProject(dir.to_path_buf()));
        }
        let config = ProjectConfig::load(dir)?;
        Ok(Project {
            root: dir.to_path_buf(),
            config,
        })
    }

    pub fn with_config(dir: &Path, config: ProjectConfig) -> Result<Project> {
        if !dir.is_dir() {
            return Err(ProjectError::NotAProject(dir.to_path_buf()));
        }
        Ok(Project {
            root: dir.to_path_buf(),
            config,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &ProjectConfig {
        &self.config
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.root.join(file)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    fn require(&self, file: &str, producer: &'static str) -> Result<PathBuf> {
        let p = self.path(file);
        if p.exists() {
            Ok(p)
        } else {
            Err(ProjectError::MissingStageInput {
                file: file.to_string(),
                producer,
            })
        }
    }

    fn cache(&self) -> PageCache {
        PageCache::new(self.path(PAGES_DIR))
    }

    /// Fills `pages/` for every seed. With `import_dir`, local
    /// `*.wikitext`/`*.wiki`/`*.html` files are copied into the cache first
    /// (the file stem is the title). Seeds not in the cache are downloaded
    /// only when `online`.
    pub fn fetch(&self, online: bool, import_dir: Option<&Path>) -> Result<FetchSummary> {
        let cache = self.cache();
        fs::create_dir_all(cache.dir())?;
        let mut imported = 0;
        if let Some(dir) = import_dir {
            imported = import_pages(&cache, dir)?;
        }
        let seed_path = self.resolve(&self.config.project.seed_list);
        let seeds = if seed_path.exists() {
            parse_seed_list(&fs::read_to_string(&seed_path)?)?
        } else if import_dir.is_some() {
            Vec::new()
        } else {
            return Err(ProjectError::MissingStageInput {
                file: seed_path.display().to_string(),
                producer: "init",
            });
        };
        let fetcher = Fetcher::new(
            cache,
            FetchConfig {
                base_url: self.config.fetch.base_url.clone(),
                politeness_delay: Duration::from_millis(self.config.fetch.politeness_delay_ms),
                online,
                kind: self.config.fetch.content_kind,
                ..FetchConfig::default()
            },
        );
        for title in &seeds {
            fetcher.fetch_page(title)?;
        }
        let cached = fetcher.cache().load_all()?.len();
        Ok(FetchSummary {
            requested: seeds.len(),
            imported,
            cached,
        })
    }

    fn pages(&self) -> Result<Vec<RawPage>> {
        let missing = || ProjectError::MissingStageInput {
            file: format!("{PAGES_DIR}/"),
            producer: "fetch",
        };
        let cache = self.cache();
        if !cache.dir().is_dir() {
            return Err(missing());
        }
        let pages = cache.load_all()?;
        if pages.is_empty() {
            return Err(missing());
        }
        Ok(pages)
    }

    /// `pages/` → `links.jsonl`.
    pub fn extract(&self) -> Result<ExtractSummary> {
        let pages = self.pages()?;
        let mut links: Vec<WikiLink> = Vec::new();
        let mut warnings = 0;
        for page in &pages {
            let ex = extract_links(page);
            if ex.warnings > 0 {
                log::warn!("{}: {} malformed or unterminated constructs", page.title(), ex.warnings);
            }
            warnings += ex.warnings;
            links.extend(ex.links);
        }
        let mut buf = Vec::new();
        write_links_jsonl(&mut buf, &links)?;
        write_atomic(&self.path(LINKS_FILE), &buf)?;
        Ok(ExtractSummary {
            pages: pages.len(),
            links: links.len(),
            warnings,
        })
    }

    fn links(&self) -> Result<Vec<WikiLink>> {
        Ok(load_links(&self.require(LINKS_FILE, "extract")?)?)
    }

    /// `links.jsonl` → `candidates.jsonl`.
    pub fn candidates(&self) -> Result<Vec<SurfaceGroup>> {
        let groups = group_links(&self.links()?);
        write_jsonl_file(&self.path(CANDIDATES_FILE), &groups)?;
        Ok(groups)
    }

    fn groups(&self) -> Result<Vec<SurfaceGroup>> {
        read_jsonl_file(&self.require(CANDIDATES_FILE, "candidates")?)
    }

    /// `candidates.jsonl` → `scored.jsonl`.
    pub fn score(&self, tagger: &TaggerSpec, scoring: ScoringConfig) -> Result<ScoreSummary> {
        let groups = self.groups()?;
        let tagger = tagger.build();
        let (scored, rejected) = score_groups(&groups, tagger.as_ref(), scoring)?;
        for r in &rejected {
            log::warn!("dropped {r:?}: no tokens after tokenization");
        }
        write_jsonl_file(&self.path(SCORED_FILE), &scored)?;
        Ok(ScoreSummary {
            scored: scored.len(),
            selected: scored.iter().filter(|s| s.candidate.selected).count(),
            rejected,
        })
    }

    pub fn scored(&self) -> Result<Vec<ScoredCandidate>> {
        read_jsonl_file(&self.require(SCORED_FILE, "score")?)
    }

    /// Pipeline counts from the stage files plus the class table of
    /// `corpus.tsv` when it exists → `stats.json`.
    pub fn stats(&self) -> Result<CorpusStats> {
        let pages = self.pages()?.len();
        let links = self.links()?.len();
        let probable = self.groups()?.len();
        let selected = self.scored()?.iter().filter(|s| s.candidate.selected).count();
        let corpus_path = self.path(CORPUS_TSV);
        let records = if corpus_path.exists() {
            read_corpus_file(&corpus_path, CorpusFormat::Tsv)?
        } else {
            Vec::new()
        };
        let stats = compute_stats(
            &records,
            PipelineCounts {
                pages,
                links,
                probable,
                selected,
            },
        )?;
        write_json(&self.path(STATS_FILE), &stats)?;
        Ok(stats)
    }

    fn roster(&self) -> Result<Roster> {
        Ok(Roster::new(self.config.service.annotators.clone())?)
    }

    /// Selected candidates with the journal replayed on top.
    pub fn annotation_service(&self) -> Result<AnnotationService> {
        let entities: Vec<EntityRecord> = self
            .scored()?
            .iter()
            .filter(|s| s.candidate.selected)
            .map(EntityRecord::from_scored)
            .collect();
        Ok(AnnotationService::with_journal(
            entities,
            self.roster()?,
            &self.path(JOURNAL_FILE),
        )?)
    }

    pub fn server_options(&self) -> ServerOptions {
        ServerOptions {
            corpus_dir: Some(self.root.clone()),
        }
    }

    /// Runs the annotation service in the foreground until Ctrl-C.
    pub fn serve(&self, port: Option<u16>) -> Result<()> {
        let service = self.annotation_service()?;
        let host = &self.config.service.host;
        let port = port.unwrap_or(self.config.service.port);
        let addr: SocketAddr = format!("{host}:{port}")
            .parse()
            .map_err(|e| ProjectError::Config(format!("service address {host}:{port}: {e}")))?;
        serve_blocking(addr, Arc::new(Mutex::new(service)), self.server_options())?;
        Ok(())
    }

    /// Journal → `agreement.json`.
    pub fn agreement(&self) -> Result<AgreementReport> {
        self.require(JOURNAL_FILE, "serve")?;
        let report = self.annotation_service()?.agreement()?;
        write_json(&self.path(AGREEMENT_FILE), &report)?;
        Ok(report)
    }

    pub fn pending_disagreements(&self) -> Result<Vec<Disagreement>> {
        self.require(JOURNAL_FILE, "serve")?;
        Ok(self.annotation_service()?.pending_disagreements()?)
    }

    /// Appends an adjudication to the journal.
    pub fn adjudicate(&self, entity_id: &str, label: &str) -> Result<Acknowledgement> {
        self.require(JOURNAL_FILE, "serve")?;
        let mut service = self.annotation_service()?;
        Ok(service.adjudicate(entity_id, label)?)
    }

    /// Journal → `corpus.tsv` and `corpus.jsonl`.
    pub fn finalize(&self) -> Result<Vec<EntityRecord>> {
        self.require(JOURNAL_FILE, "serve")?;
        let records = self.annotation_service()?.finalize()?;
        write_corpus_file(&self.path(CORPUS_TSV), &records, CorpusFormat::Tsv)?;
        write_corpus_file(&self.path(CORPUS_JSONL), &records, CorpusFormat::Jsonl)?;
        Ok(records)
    }

    /// The finalized corpus; `corpus.jsonl` is preferred since it also
    /// carries annotations and provenance.
    pub fn corpus(&self) -> Result<Vec<EntityRecord>> {
        let jsonl = self.path(CORPUS_JSONL);
        if jsonl.exists() {
            return Ok(read_corpus_file(&jsonl, CorpusFormat::Jsonl)?);
        }
        Ok(read_corpus_file(
            &self.require(CORPUS_TSV, "finalize")?,
            CorpusFormat::Tsv,
        )?)
    }

    pub fn export(&self, format: CorpusFormat) -> Result<String> {
        Ok(export_corpus(&self.corpus()?, format)?)
    }

    fn labeled_items(&self) -> Result<Vec<LabeledItem>> {
        Ok(LabeledItem::from_records(&self.corpus()?))
    }

    /// `corpus.tsv` → `out` (a project-relative file name).
    pub fn evaluate(&self, kind: ModelKind, cv: &CvConfig, out: &str) -> Result<EvalReport> {
        let report = cross_validate(&self.labeled_items()?, kind, cv)?;
        write_atomic(&self.path(out), report.to_json().as_bytes())?;
        Ok(report)
    }

    /// `corpus.tsv` → `learning_curve.csv`.
    pub fn learning_curve(&self, kind: ModelKind, cv: &CvConfig, fractions: &[f64]) -> Result<Vec<CurvePoint>> {
        let points = learning_curve(&self.labeled_items()?, fractions, kind, cv)?;
        write_atomic(&self.path(CURVE_FILE), curve_to_csv(&points).as_bytes())?;
        Ok(points)
    }
}

fn import_pages(cache: &PageCache, dir: &Path) -> Result<usize> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    let mut n = 0;
    for path in entries {
        let kind = match path.extension().and_then(|e| e.to_str()) {
            Some("wikitext" | "wiki") => ContentKind::Wikitext,
            Some("html" | "htm") => ContentKind::Html,
            _ => continue,
        };
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let title = normalize_title(stem)?;
        let body = fs::read_to_string(&path)?;
        cache.store(&RawPage::new(&title, kind, body)?)?;
        n += 1;
    }
    Ok(n)
}

fn write_jsonl_file<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, items)?;
    write_atomic(path, &buf)?;
    Ok(())
}

fn read_jsonl_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    Ok(read_jsonl(BufReader::new(File::open(path)?))?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::from)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(())
}
