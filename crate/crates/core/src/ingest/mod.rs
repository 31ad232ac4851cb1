//! Page acquisition and wikilink extraction.
//!
//! Category and content pages arrive either as raw wikitext or as rendered
//! HTML. Both parsers emit the same [`WikiLink`] records: article-namespace
//! targets only, in document order, duplicates kept.

mod fetch;
mod html;
mod title;
mod wikitext;

use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fetch::{parse_seed_list, title_from_seed, FetchConfig, Fetcher, PageCache};
pub use html::parse_html_links;
pub use title::{collapse_whitespace, is_article_title, normalize_href_title, normalize_title};
pub use wikitext::parse_wikitext_links;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("title is empty after normalization: {0:?}")]
    EmptyTitle(String),
    #[error("page {0:?} has an empty body")]
    EmptyBody(String),
    #[error("page {title:?} is {actual:?}, expected {expected:?}")]
    WrongContentKind {
        title: String,
        expected: ContentKind,
        actual: ContentKind,
    },
    #[error("page {0:?} is not cached and network access is disabled (pass --online)")]
    NetworkDisabled(String),
    #[error("fetching {title:?} failed after {attempts} attempts: {message}")]
    NetworkError {
        title: String,
        attempts: u32,
        message: String,
    },
    #[error("page {0:?} does not exist (HTTP 404)")]
    PageMissing(String),
    #[error("malformed cache file {path}: {reason}")]
    CacheFormat { path: String, reason: String },
    #[error("malformed links record at line {line}: {reason}")]
    LinksFormat { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Namespace {
    Article,
    Category,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentKind {
    Wikitext,
    Html,
}

impl ContentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContentKind::Wikitext => "wikitext",
            ContentKind::Html => "html",
        }
    }
}

impl std::str::FromStr for ContentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wikitext" => Ok(ContentKind::Wikitext),
            "html" => Ok(ContentKind::Html),
            other => Err(format!("unknown content kind {other:?}")),
        }
    }
}

/// A category or content page as fetched or loaded from a fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPage {
    title: String,
    namespace: Namespace,
    content_kind: ContentKind,
    body: String,
    pub source_url: Option<String>,
    pub fetched_at: Option<DateTime<Utc>>,
}

impl RawPage {
    pub fn new(
        title: &str,
        content_kind: ContentKind,
        body: impl Into<String>,
    ) -> Result<Self, IngestError> {
        let title = normalize_title(title)?;
        let body = body.into();
        if body.trim().is_empty() {
            return Err(IngestError::EmptyBody(title));
        }
        let namespace = namespace_of(&title);
        Ok(RawPage {
            title,
            namespace,
            content_kind,
            body,
            source_url: None,
            fetched_at: None,
        })
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn content_kind(&self) -> ContentKind {
        self.content_kind
    }

    pub fn body(&self) -> &str {
        &self.body
    }
}

fn namespace_of(title: &str) -> Namespace {
    if let Some(rest) = title.split_once(':') {
        if rest.0.trim().eq_ignore_ascii_case("category") {
            return Namespace::Category;
        }
    }
    if is_article_title(title) {
        Namespace::Article
    } else {
        Namespace::Other
    }
}

/// One internal hyperlink found on a page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WikiLink {
    pub source_title: String,
    pub target_title: String,
    pub anchor_text: String,
    pub position_index: usize,
}

/// Links of one page plus the number of markup regions skipped as malformed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkExtraction {
    pub links: Vec<WikiLink>,
    pub warnings: usize,
}

/// Dispatches on the page's content kind.
pub fn extract_links(page: &RawPage) -> LinkExtraction {
    match page.content_kind() {
        ContentKind::Wikitext => wikitext::extract(page.title(), page.body()),
        ContentKind::Html => html::extract(page.title(), page.body()),
    }
}

pub fn write_links_jsonl<W: Write>(mut out: W, links: &[WikiLink]) -> std::io::Result<()> {
    for link in links {
        serde_json::to_writer(&mut out, link)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_links_jsonl<R: BufRead>(input: R) -> Result<Vec<WikiLink>, IngestError> {
    let mut links = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let link: WikiLink =
            serde_json::from_str(&line).map_err(|e| IngestError::LinksFormat {
                line: i + 1,
                reason: e.to_string(),
            })?;
        links.push(link);
    }
    Ok(links)
}

pub fn load_links(path: &Path) -> Result<Vec<WikiLink>, IngestError> {
    let f = std::fs::File::open(path)?;
    read_links_jsonl(std::io::BufReader::new(f))
}
