use percent_encoding::percent_decode_str;

use super::IngestError;

/// Namespace prefixes whose pages are not articles.
pub const NON_ARTICLE_PREFIXES: &[&str] = &[
    "Category",
    "File",
    "Image",
    "Media",
    "Template",
    "Help",
    "Special",
    "Wikipedia",
    "Portal",
    "Talk",
    "User",
    "User talk",
    "Draft",
    "Module",
    "MediaWiki",
    "Book",
    "TimedText",
    "WP",
    "Project",
];

/// Canonicalizes a page title: underscores become spaces, whitespace runs
/// collapse, any `#fragment` is dropped.
pub fn normalize_title(raw: &str) -> Result<String, IngestError> {
    let without_fragment = match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    };
    let replaced = without_fragment.replace('_', " ");
    let collapsed = collapse_whitespace(&replaced);
    if collapsed.is_empty() {
        return Err(IngestError::EmptyTitle(raw.to_string()));
    }
    Ok(collapsed)
}

/// Same as [`normalize_title`] for a title taken from an href path, which is
/// percent-decoded first.
pub fn normalize_href_title(encoded: &str) -> Result<String, IngestError> {
    let decoded = percent_decode_str(encoded).decode_utf8_lossy();
    normalize_title(&decoded)
}

pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True when the title lives in the article namespace.
///
/// A leading `:` marks an interwiki/interlanguage or escaped link, a
/// `xx:` / `xxx:` language code prefix marks an interlanguage link; both
/// are treated as non-article.
pub fn is_article_title(title: &str) -> bool {
    let t = title.trim_start();
    if t.starts_with(':') {
        return false;
    }
    let Some(colon) = t.find(':') else {
        return true;
    };
    let prefix = t[..colon].trim();
    let canonical = prefix.replace('_', " ");
    if NON_ARTICLE_PREFIXES
        .iter()
        .any(|p| p.eq_ignore_ascii_case(&canonical))
    {
        return false;
    }
    if canonical.to_ascii_lowercase().ends_with(" talk") {
        return false;
    }
    !is_language_code(&canonical)
}

fn is_language_code(prefix: &str) -> bool {
    let parts: Vec<&str> = prefix.split('-').collect();
    let head = parts[0];
    (2..=3).contains(&head.len())
        && head.chars().all(|c| c.is_ascii_lowercase())
        && parts[1..]
            .iter()
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
}
