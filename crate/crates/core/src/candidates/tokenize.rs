use super::CandidateError;

/// Splits a surface form into tokens.
///
/// Leading and trailing punctuation is stripped from each token. Internal
/// hyphens, periods and apostrophes survive, and an abbreviation such as
/// `U.P.` keeps its final period. Fragments left empty are dropped.
pub fn tokenize(surface: &str) -> Result<Vec<String>, CandidateError> {
    let tokens: Vec<String> = surface
        .split_whitespace()
        .filter_map(strip_token)
        .collect();
    if tokens.is_empty() {
        return Err(CandidateError::EmptySurface(surface.to_string()));
    }
    Ok(tokens)
}

fn strip_token(raw: &str) -> Option<String> {
    let core = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if core.is_empty() {
        return None;
    }
    let start = raw.find(core).expect("core is a substring");
    let mut end = start + core.len();
    // U.P. / J.P. keep the closing period of the abbreviation
    if core.contains('.') && raw[end..].starts_with('.') {
        end += 1;
    }
    Some(raw[start..end].to_string())
}
