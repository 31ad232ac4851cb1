use super::title::{collapse_whitespace, is_article_title, normalize_href_title};
use super::{ContentKind, IngestError, LinkExtraction, RawPage, WikiLink};

/// Extracts article wikilinks from a wikitext page.
///
/// `[[Target]]` and `[[Target|Anchor]]` produce links. Templates, comments,
/// `<nowiki>` regions and non-article links (including their captions) are
/// skipped whole. An unterminated `[[` is skipped and counted as a warning.
pub fn parse_wikitext_links(page: &RawPage) -> Result<LinkExtraction, IngestError> {
    if page.content_kind() != ContentKind::Wikitext {
        return Err(IngestError::WrongContentKind {
            title: page.title().to_string(),
            expected: ContentKind::Wikitext,
            actual: page.content_kind(),
        });
    }
    Ok(extract(page.title(), page.body()))
}

pub(super) fn extract(source_title: &str, body: &str) -> LinkExtraction {
    let mut out = LinkExtraction::default();
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &body[i..];
        if rest.starts_with("<!--") {
            match rest.find("-->") {
                Some(end) => i += end + 3,
                None => {
                    out.warnings += 1;
                    break;
                }
            }
        } else if starts_with_ignore_case(rest, "<nowiki>") {
            match find_ignore_case(rest, "</nowiki>") {
                Some(end) => i += end + "</nowiki>".len(),
                None => {
                    out.warnings += 1;
                    i += "<nowiki>".len();
                }
            }
        } else if rest.starts_with("{{") {
            match matching_close(rest, "{{", "}}") {
                Some(end) => i += end,
                None => {
                    out.warnings += 1;
                    i += 2;
                }
            }
        } else if rest.starts_with("[[") {
            match matching_close(rest, "[[", "]]") {
                Some(end) => {
                    let inner = &rest[2..end - 2];
                    match classify(inner) {
                        Inner::Link { target, anchor } => {
                            out.links.push(WikiLink {
                                source_title: source_title.to_string(),
                                target_title: target,
                                anchor_text: anchor,
                                position_index: out.links.len(),
                            });
                            i += end;
                        }
                        Inner::Skip => i += end,
                        Inner::Malformed => {
                            out.warnings += 1;
                            i += 2;
                        }
                    }
                }
                None => {
                    out.warnings += 1;
                    i += 2;
                }
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
    out
}

enum Inner {
    Link { target: String, anchor: String },
    Skip,
    Malformed,
}

fn classify(inner: &str) -> Inner {
    let (raw_target, raw_anchor) = match inner.find('|') {
        Some(p) => (&inner[..p], Some(&inner[p + 1..])),
        None => (inner, None),
    };
    if raw_target.contains('\n') || raw_target.contains('[') || raw_target.contains(']') {
        return Inner::Malformed;
    }
    if !is_article_title(raw_target) {
        // File/Category/interwiki links: skipped whole, captions included.
        return Inner::Skip;
    }
    // Article links cannot nest.
    if inner.contains("[[") {
        return Inner::Malformed;
    }
    // MediaWiki accepts percent-encoded targets such as [[Mah%C4%81r%C4%81j]]
    let Ok(target) = normalize_href_title(raw_target) else {
        // same-page section link such as [[#History]]
        return Inner::Skip;
    };
    let anchor = raw_anchor
        .map(|a| collapse_whitespace(&strip_quote_markup(a)))
        .filter(|a| !a.is_empty())
        .unwrap_or_else(|| target.clone());
    Inner::Link { target, anchor }
}

/// Byte offset just past the close delimiter balancing the open delimiter at
/// the start of `s`.
fn matching_close(s: &str, open: &str, close: &str) -> Option<usize> {
    debug_assert!(s.starts_with(open));
    let mut depth = 0usize;
    let mut i = 0;
    while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with(open) {
            depth += 1;
            i += open.len();
        } else if rest.starts_with(close) {
            depth -= 1;
            i += close.len();
            if depth == 0 {
                return Some(i);
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
    None
}

/// Drops `''` / `'''` italic and bold markers.
fn strip_quote_markup(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\'' {
            let mut j = i;
            while j < chars.len() && chars[j] == '\'' {
                j += 1;
            }
            if j - i >= 2 {
                i = j;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

fn starts_with_ignore_case(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len()
        && s.is_char_boundary(prefix.len())
        && s[..prefix.len()].eq_ignore_ascii_case(prefix)
}

fn find_ignore_case(s: &str, needle: &str) -> Option<usize> {
    s.to_ascii_lowercase().find(needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn links(body: &str) -> Vec<(String, String)> {
        extract("Src", body)
            .links
            .into_iter()
            .map(|l| (l.target_title, l.anchor_text))
            .collect()
    }

    fn pair(t: &str, a: &str) -> (String, String) {
        (t.to_string(), a.to_string())
    }

    #[test]
    fn unpiped_link() {
        assert_eq!(links("[[New Delhi]]"), vec![pair("New Delhi", "New Delhi")]);
    }

    #[test]
    fn piped_link() {
        assert_eq!(links("[[Delhi|the capital]]"), vec![pair("Delhi", "the capital")]);
    }

    #[test]
    fn percent_encoded_target() {
        assert_eq!(
            links("[[Mah%C4%81tm%C4%81_Gandhi|Bapu]]"),
            vec![pair("Mahātmā Gandhi", "Bapu")]
        );
    }

    #[test]
    fn category_skipped() {
        assert!(links("[[Category:Politics of India]]").is_empty());
    }

    #[test]
    fn file_caption_not_descended() {
        let body = "[[File:Taj.jpg|thumb|The [[Taj Mahal]] at dawn]] then [[Agra]]";
        assert_eq!(links(body), vec![pair("Agra", "Agra")]);
    }

    #[test]
    fn templates_and_comments_skipped() {
        let body = "{{Infobox|capital=[[Lucknow]]|{{nested|[[X]]}}}} <!-- [[Hidden]] --> [[Patna]] <nowiki>[[Raw]]</nowiki>";
        let r = extract("Src", body);
        assert_eq!(r.warnings, 0);
        assert_eq!(r.links.len(), 1);
        assert_eq!(r.links[0].target_title, "Patna");
    }

    #[test]
    fn malformed_bracket_counted() {
        let r = extract("Src", "[[Broken link\n and then [[Kanpur]] and [[Tail");
        assert_eq!(r.warnings, 2);
        assert_eq!(r.links.len(), 1);
        assert_eq!(r.links[0].target_title, "Kanpur");
        assert_eq!(r.links[0].position_index, 0);
    }

    #[test]
    fn fragment_and_underscores() {
        assert_eq!(
            links("[[Uttar_Pradesh#Economy|UP economy]] [[#Section]]"),
            vec![pair("Uttar Pradesh", "UP economy")]
        );
    }

    #[test]
    fn interwiki_skipped() {
        assert!(links("[[:hi:दिल्ली]] [[fr:Delhi]] [[:Category:X]]").is_empty());
    }

    #[test]
    fn anchor_markup_and_empty_pipe() {
        assert_eq!(
            links("[[Premchand|'''Munshi''' Premchand]] [[Varanasi|]]"),
            vec![pair("Premchand", "Munshi Premchand"), pair("Varanasi", "Varanasi")]
        );
    }

    #[test]
    fn positions_increase() {
        let r = extract("Src", "[[A]] [[B|b]] [[A]]");
        let pos: Vec<usize> = r.links.iter().map(|l| l.position_index).collect();
        assert_eq!(pos, vec![0, 1, 2]);
    }

    #[test]
    fn wrong_kind_rejected() {
        let page = RawPage::new("X", ContentKind::Html, "<a href=\"/wiki/A\">A</a>").unwrap();
        assert!(matches!(
            parse_wikitext_links(&page),
            Err(IngestError::WrongContentKind { .. })
        ));
    }
}
