use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};
use sha2::{Digest, Sha256};

use super::title::{normalize_href_title, normalize_title};
use super::{ContentKind, IngestError, RawPage};

/// Floor on the gap between two outgoing requests.
pub const MIN_POLITENESS_DELAY: Duration = Duration::from_millis(500);
const MAX_ATTEMPTS: u32 = 3;

const TITLE_ENCODE: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'#')
    .add(b'%')
    .add(b'&')
    .add(b'?')
    .add(b'<')
    .add(b'>')
    .add(b'+');

/// Reads a seed list: one title or wiki URL per line, `#` starts a comment.
pub fn parse_seed_list(text: &str) -> Result<Vec<String>, IngestError> {
    let mut seeds = Vec::new();
    for line in text.lines() {
        let line = match line.find(" #").or(if line.trim_start().starts_with('#') {
            Some(0)
        } else {
            None
        }) {
            Some(p) => &line[..p],
            None => line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        seeds.push(title_from_seed(line)?);
    }
    Ok(seeds)
}

/// Accepts either a bare title or a URL containing `/wiki/<Title>`.
pub fn title_from_seed(seed: &str) -> Result<String, IngestError> {
    if seed.starts_with("http://") || seed.starts_with("https://") {
        if let Some(p) = seed.find("/wiki/") {
            return normalize_href_title(&seed[p + "/wiki/".len()..]);
        }
        if let Some(p) = seed.find("title=") {
            let t = &seed[p + "title=".len()..];
            let t = t.split('&').next().unwrap_or(t);
            return normalize_href_title(t);
        }
    }
    normalize_title(seed)
}

/// On-disk page cache: `<dir>/<sha256(title)>.page`, a short header then the
/// raw body.
#[derive(Debug, Clone)]
pub struct PageCache {
    dir: PathBuf,
}

impl PageCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        PageCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, title: &str) -> PathBuf {
        let digest = Sha256::digest(title.as_bytes());
        self.dir.join(format!("{}.page", hex::encode(digest)))
    }

    pub fn load(&self, title: &str) -> Result<Option<RawPage>, IngestError> {
        let path = self.path_for(title);
        if !path.exists() {
            return Ok(None);
        }
        read_page_file(&path).map(Some)
    }

    pub fn store(&self, page: &RawPage) -> Result<PathBuf, IngestError> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(page.title());
        let mut text = String::new();
        text.push_str(&format!("title: {}\n", page.title()));
        text.push_str(&format!("kind: {}\n", page.content_kind().as_str()));
        text.push_str(&format!("url: {}\n", page.source_url.as_deref().unwrap_or("")));
        text.push_str(&format!(
            "fetched_at: {}\n\n",
            page.fetched_at.map(|t| t.to_rfc3339()).unwrap_or_default()
        ));
        text.push_str(page.body());
        let tmp = path.with_extension("page.tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Every cached page, ordered by title.
    pub fn load_all(&self) -> Result<Vec<RawPage>, IngestError> {
        let mut pages = Vec::new();
        if !self.dir.exists() {
            return Ok(pages);
        }
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "page") {
                pages.push(read_page_file(&path)?);
            }
        }
        pages.sort_by(|a, b| a.title().cmp(b.title()));
        Ok(pages)
    }
}

fn read_page_file(path: &Path) -> Result<RawPage, IngestError> {
    let text = fs::read_to_string(path)?;
    let bad = |reason: &str| IngestError::CacheFormat {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let (header, body) = text.split_once("\n\n").ok_or_else(|| bad("missing header"))?;
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for line in header.lines() {
        let (k, v) = line.split_once(':').ok_or_else(|| bad("header line without ':'"))?;
        fields.insert(k.trim(), v.trim());
    }
    let title = fields.get("title").ok_or_else(|| bad("missing title"))?;
    let kind: ContentKind = fields
        .get("kind")
        .ok_or_else(|| bad("missing kind"))?
        .parse()
        .map_err(|e: String| bad(&e))?;
    let mut page = RawPage::new(title, kind, body)?;
    page.source_url = fields
        .get("url")
        .filter(|u| !u.is_empty())
        .map(|u| u.to_string());
    page.fetched_at = match fields.get("fetched_at").filter(|t| !t.is_empty()) {
        Some(t) => Some(
            DateTime::parse_from_rfc3339(t)
                .map_err(|e| bad(&e.to_string()))?
                .with_timezone(&Utc),
        ),
        None => None,
    };
    Ok(page)
}

#[derive(Debug, Clone)]
pub struct FetchConfig {
    /// Scheme and host, e.g. `https://en.wikipedia.org`.
    pub base_url: String,
    pub politeness_delay: Duration,
    pub online: bool,
    pub kind: ContentKind,
    pub user_agent: String,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            base_url: "https://en.wikipedia.org".to_string(),
            politeness_delay: Duration::from_millis(1000),
            online: false,
            kind: ContentKind::Wikitext,
            user_agent: concat!("wikiner/", env!("CARGO_PKG_VERSION")).to_string(),
        }
    }
}

/// Cache-first page fetcher. Requests are globally rate limited and
/// single-flight per title; a cache hit never touches the network.
pub struct Fetcher {
    cache: PageCache,
    config: FetchConfig,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
    in_flight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Fetcher {
    pub fn new(cache: PageCache, mut config: FetchConfig) -> Self {
        config.politeness_delay = config.politeness_delay.max(MIN_POLITENESS_DELAY);
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .user_agent(config.user_agent.as_str())
            .build()
            .new_agent();
        Fetcher {
            cache,
            config,
            agent,
            last_request: Mutex::new(None),
            in_flight: Mutex::new(HashMap::new()),
        }
    }

    pub fn cache(&self) -> &PageCache {
        &self.cache
    }

    pub fn url_for(&self, title: &str) -> String {
        let encoded = utf8_percent_encode(&title.replace(' ', "_"), TITLE_ENCODE).to_string();
        let base = self.config.base_url.trim_end_matches('/');
        match self.config.kind {
            ContentKind::Wikitext => format!("{base}/w/index.php?title={encoded}&action=raw"),
            ContentKind::Html => format!("{base}/wiki/{encoded}"),
        }
    }

    pub fn fetch_page(&self, title: &str) -> Result<RawPage, IngestError> {
        let title = normalize_title(title)?;
        if let Some(page) = self.cache.load(&title)? {
            return Ok(page);
        }
        if !self.config.online {
            return Err(IngestError::NetworkDisabled(title));
        }
        let slot = {
            let mut map = self.in_flight.lock().expect("in-flight map poisoned");
            map.entry(title.clone()).or_default().clone()
        };
        let _guard = slot.lock().expect("title lock poisoned");
        // another thread may have filled the cache while we waited
        if let Some(page) = self.cache.load(&title)? {
            return Ok(page);
        }
        let url = self.url_for(&title);
        let mut last_err = String::new();
        for attempt in 1..=MAX_ATTEMPTS {
            self.wait_turn();
            match self.agent.get(&url).call() {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status == 404 {
                        return Err(IngestError::PageMissing(title));
                    }
                    if (200..300).contains(&status) {
                        let body = resp.body_mut().read_to_string().map_err(|e| {
                            IngestError::NetworkError {
                                title: title.clone(),
                                attempts: attempt,
                                message: e.to_string(),
                            }
                        })?;
                        let mut page = RawPage::new(&title, self.config.kind, body)?;
                        page.source_url = Some(url.clone());
                        page.fetched_at = Some(Utc::now());
                        self.cache.store(&page)?;
                        return Ok(page);
                    }
                    last_err = format!("HTTP {status}");
                    if (400..500).contains(&status) && status != 429 {
                        return Err(IngestError::NetworkError {
                            title,
                            attempts: attempt,
                            message: last_err,
                        });
                    }
                }
                Err(e) => last_err = e.to_string(),
            }
            log::warn!("fetch {title:?} attempt {attempt} failed: {last_err}");
        }
        Err(IngestError::NetworkError {
            title,
            attempts: MAX_ATTEMPTS,
            message: last_err,
        })
    }

    fn wait_turn(&self) {
        let mut last = self.last_request.lock().expect("rate limiter poisoned");
        if let Some(prev) = *last {
            let ready = prev + self.config.politeness_delay;
            let now = Instant::now();
            if ready > now {
                std::thread::sleep(ready - now);
            }
        }
        *last = Some(Instant::now());
    }
}
