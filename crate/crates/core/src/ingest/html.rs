use super::title::{collapse_whitespace, is_article_title, normalize_href_title};
use super::{ContentKind, IngestError, LinkExtraction, RawPage, WikiLink};

/// Extracts article links from rendered page HTML.
///
/// Only `<a>` elements whose `href` starts with `/wiki/` and carries no query
/// string count. The anchor text is the element's text content with tags
/// removed and entities decoded; an image-only anchor falls back to the
/// target title.
pub fn parse_html_links(page: &RawPage) -> Result<LinkExtraction, IngestError> {
    if page.content_kind() != ContentKind::Html {
        return Err(IngestError::WrongContentKind {
            title: page.title().to_string(),
            expected: ContentKind::Html,
            actual: page.content_kind(),
        });
    }
    Ok(extract(page.title(), page.body()))
}

pub(super) fn extract(source_title: &str, body: &str) -> LinkExtraction {
    let mut out = LinkExtraction::default();
    let lower = body.to_ascii_lowercase();
    let mut i = 0;
    while let Some(off) = lower[i..].find('<') {
        let start = i + off;
        let rest = &lower[start..];
        if rest.starts_with("<!--") {
            match rest.find("-->") {
                Some(end) => i = start + end + 3,
                None => {
                    out.warnings += 1;
                    break;
                }
            }
            continue;
        }
        if let Some(skip) = raw_text_element(rest) {
            let close = format!("</{skip}");
            match rest.find(&close) {
                Some(end) => i = start + end + close.len(),
                None => {
                    out.warnings += 1;
                    break;
                }
            }
            continue;
        }
        if !is_anchor_open(rest) {
            i = start + 1;
            continue;
        }
        let Some(tag_end) = rest.find('>') else {
            out.warnings += 1;
            break;
        };
        let Some(close) = rest.find("</a") else {
            out.warnings += 1;
            i = start + tag_end + 1;
            continue;
        };
        if close < tag_end {
            out.warnings += 1;
            i = start + 2;
            continue;
        }
        // an unclosed <a> followed by another anchor: do not swallow the next one
        if rest[tag_end..close].match_indices('<').any(|(p, _)| is_anchor_open(&rest[tag_end + p..])) {
            out.warnings += 1;
            i = start + tag_end + 1;
            continue;
        }
        let tag = &body[start..start + tag_end + 1];
        let inner = &body[start + tag_end + 1..start + close];
        let after_close = match lower[start + close..].find('>') {
            Some(p) => start + close + p + 1,
            None => body.len(),
        };
        i = after_close;
        let Some(href) = attribute(tag, "href") else {
            continue;
        };
        let href = decode_entities(&href);
        let Some(path) = href.strip_prefix("/wiki/") else {
            continue;
        };
        if path.contains('?') {
            continue;
        }
        let Ok(target) = normalize_href_title(path) else {
            continue;
        };
        if !is_article_title(&target) {
            continue;
        }
        let text = collapse_whitespace(&decode_entities(&strip_tags(inner)));
        let anchor = if text.is_empty() { target.clone() } else { text };
        out.links.push(WikiLink {
            source_title: source_title.to_string(),
            target_title: target,
            anchor_text: anchor,
            position_index: out.links.len(),
        });
    }
    out
}

fn is_anchor_open(lower_rest: &str) -> bool {
    let b = lower_rest.as_bytes();
    b.len() >= 3 && b[1] == b'a' && (b[2].is_ascii_whitespace() || b[2] == b'>')
}

fn raw_text_element(lower_rest: &str) -> Option<&'static str> {
    ["script", "style"].into_iter().find(|name| {
        lower_rest[1..].starts_with(name)
            && lower_rest[1 + name.len()..]
                .chars()
                .next()
                .is_some_and(|c| c == '>' || c.is_ascii_whitespace())
    })
}

/// Value of a (case-insensitive) attribute in an opening tag. Handles double,
/// single and unquoted values.
fn attribute(tag: &str, name: &str) -> Option<String> {
    let lower = tag.to_ascii_lowercase();
    let mut from = 0;
    while let Some(off) = lower[from..].find(name) {
        let pos = from + off;
        from = pos + name.len();
        let preceded_ok = pos > 0 && lower.as_bytes()[pos - 1].is_ascii_whitespace();
        if !preceded_ok {
            continue;
        }
        let rest = tag[pos + name.len()..].trim_start();
        let Some(rest) = rest.strip_prefix('=') else {
            continue;
        };
        let rest = rest.trim_start();
        let value = if let Some(r) = rest.strip_prefix('"') {
            &r[..r.find('"')?]
        } else if let Some(r) = rest.strip_prefix('\'') {
            &r[..r.find('\'')?]
        } else {
            let end = rest
                .find(|c: char| c.is_ascii_whitespace() || c == '>')
                .unwrap_or(rest.len());
            &rest[..end]
        };
        return Some(value.to_string());
    }
    None
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out
}

/// Decodes the named entities common in rendered wiki pages and all numeric
/// character references. Unknown entities are left as written.
pub(crate) fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let after = &rest[amp + 1..];
        let decoded = after.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let name = &after[..semi];
            let ch = match name {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                "ndash" => Some('\u{2013}'),
                "mdash" => Some('\u{2014}'),
                _ => {
                    let num = name.strip_prefix('#')?;
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                        None => num.parse().ok()?,
                    };
                    char::from_u32(code)
                }
            };
            ch.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &after[semi + 1..];
            }
            None => {
                out.push('&');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
