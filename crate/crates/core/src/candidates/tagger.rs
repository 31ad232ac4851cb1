use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CandidateError;

const BUNDLED_LEXICON: &str = include_str!("lexicon.tsv");

macro_rules! pos_tags {
    ($($variant:ident => $text:literal),* $(,)?) => {
        /// Penn Treebank tag set plus `OTHER` for anything unrecognised.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum PosTag {
            $($variant,)*
        }

        impl PosTag {
            pub const ALL: &'static [PosTag] = &[$(PosTag::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PosTag::$variant => $text,)*
                }
            }
        }

        impl FromStr for PosTag {
            type Err = CandidateError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(PosTag::$variant),)*
                    other => Err(CandidateError::UnknownTag(other.to_string())),
                }
            }
        }
    };
}

pos_tags! {
    Cc => "CC", Cd => "CD", Dt => "DT", Ex => "EX", Fw => "FW", In => "IN",
    Jj => "JJ", Jjr => "JJR", Jjs => "JJS", Ls => "LS", Md => "MD",
    Nn => "NN", Nns => "NNS", Nnp => "NNP", Nnps => "NNPS", Pdt => "PDT",
    Pos => "POS", Prp => "PRP", PrpS => "PRP$", Rb => "RB", Rbr => "RBR",
    Rbs => "RBS", Rp => "RP", Sym => "SYM", To => "TO", Uh => "UH",
    Vb => "VB", Vbd => "VBD", Vbg => "VBG", Vbn => "VBN", Vbp => "VBP",
    Vbz => "VBZ", Wdt => "WDT", Wp => "WP", WpS => "WP$", Wrb => "WRB",
    Other => "OTHER",
}

impl PosTag {
    /// Tags that mark a nominal expression for scoring.
    pub fn is_nominal(self) -> bool {
        matches!(self, PosTag::Nnp | PosTag::Nns | PosTag::Nn)
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PosTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PosTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Assigns one part-of-speech tag per token of an isolated expression.
pub trait Tagger: Send + Sync {
    fn tag(&self, tokens: &[String]) -> Result<Vec<PosTag>, CandidateError>;

    /// Tags many expressions at once. Implementations with per-call setup
    /// cost override this.
    fn tag_batch(&self, batch: &[Vec<String>]) -> Result<Vec<Vec<PosTag>>, CandidateError> {
        batch.iter().map(|tokens| self.tag(tokens)).collect()
    }
}

/// Deterministic rule tagger backed by a function-word lexicon.
#[derive(Debug, Clone)]
pub struct HeuristicTagger {
    lexicon: HashMap<String, PosTag>,
}

impl Default for HeuristicTagger {
    fn default() -> Self {
        Self::from_lexicon(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }
}

impl HeuristicTagger {
    /// Parses `token<TAB>TAG` lines; `#` lines are comments.
    pub fn from_lexicon(text: &str) -> Result<Self, CandidateError> {
        let mut lexicon = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| CandidateError::Lexicon(i + 1, line.to_string()))?;
            lexicon.insert(word.trim().to_string(), tag.trim().parse()?);
        }
        Ok(HeuristicTagger { lexicon })
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn tag_token(&self, token: &str) -> PosTag {
        if let Some(&t) = self.lexicon.get(token) {
            return t;
        }
        let mut chars = token.chars();
        let first = chars.next();
        let rest_lower = chars.clone().all(|c| !c.is_uppercase());
        if first.is_some_and(char::is_uppercase) && rest_lower {
            // sentence-initial style capitalisation of a function word: "The"
            if let Some(&t) = self.lexicon.get(&token.to_lowercase()) {
                return t;
            }
        }
        if token.chars().all(|c| c.is_ascii_digit()) {
            return PosTag::Cd;
        }
        if first.is_some_and(char::is_uppercase) {
            return PosTag::Nnp;
        }
        if token.chars().all(|c| c.is_alphabetic() && c.is_lowercase()) {
            return if token.ends_with('s') {
                PosTag::Nns
            } else {
                PosTag::Nn
            };
        }
        PosTag::Other
    }
}

impl Tagger for HeuristicTagger {
    fn tag(&self, tokens: &[String]) -> Result<Vec<PosTag>, CandidateError> {
        Ok(tokens.iter().map(|t| self.tag_token(t)).collect())
    }
}

/// External tagger speaking a line protocol: tokens in, one per line; tags
/// out, one per line, same order. Unknown tag symbols map to `OTHER`.
#[derive(Debug, Clone)]
pub struct CommandTagger {
    program: PathBuf,
}

impl CommandTagger {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        CommandTagger {
            program: program.into(),
        }
    }

    fn run(&self, tokens: &[&str]) -> Result<Vec<PosTag>, CandidateError> {
        let proto = |msg: String| CandidateError::TaggerProtocol(msg);
        let mut child = Command::new(&self.program)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| proto(format!("cannot start {}: {e}", self.program.display())))?;
        let mut input = String::new();
        for t in tokens {
            input.push_str(t);
            input.push('\n');
        }
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin
                .write_all(input.as_bytes())
                .map_err(|e| proto(format!("writing tokens: {e}")))?;
        }
        let output = child
            .wait_with_output()
            .map_err(|e| proto(format!("waiting for tagger: {e}")))?;
        if !output.status.success() {
            return Err(proto(format!("tagger exited with {}", output.status)));
        }
        let text = String::from_utf8_lossy(&output.stdout);
        let tags: Vec<PosTag> = text
            .lines()
            .map(|l| l.trim().parse().unwrap_or(PosTag::Other))
            .collect();
        if tags.len() != tokens.len() {
            return Err(proto(format!(
                "expected {} tags, got {}",
                tokens.len(),
                tags.len()
            )));
        }
        Ok(tags)
    }
}

impl Tagger for CommandTagger {
    fn tag(&self, tokens: &[String]) -> Result<Vec<PosTag>, CandidateError> {
        let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
        self.run(&refs)
    }

    fn tag_batch(&self, batch: &[Vec<String>]) -> Result<Vec<Vec<PosTag>>, CandidateError> {
        let flat: Vec<&str> = batch.iter().flatten().map(String::as_str).collect();
        if flat.is_empty() {
            return Ok(batch.iter().map(|_| Vec::new()).collect());
        }
        let mut tags = self.run(&flat)?.into_iter();
        Ok(batch
            .iter()
            .map(|tokens| tags.by_ref().take(tokens.len()).collect())
            .collect())
    }
}

/// `heuristic` or `cmd:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TaggerSpec {
    Heuristic,
    Command(PathBuf),
}

impl TaggerSpec {
    pub fn build(&self) -> Box<dyn Tagger> {
        match self {
            TaggerSpec::Heuristic => Box::new(HeuristicTagger::default()),
            TaggerSpec::Command(p) => Box::new(CommandTagger::new(p)),
        }
    }
}

impl FromStr for TaggerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "heuristic" {
            Ok(TaggerSpec::Heuristic)
        } else if let Some(p) = s.strip_prefix("cmd:").filter(|p| !p.is_empty()) {
            Ok(TaggerSpec::Command(PathBuf::from(p)))
        } else {
            Err(format!("unknown tagger {s:?} (heuristic|cmd:<path>)"))
        }
    }
}

impl TryFrom<String> for TaggerSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<TaggerSpec> for String {
    fn from(t: TaggerSpec) -> String {
        match t {
            TaggerSpec::Heuristic => "heuristic".to_string(),
            TaggerSpec::Command(p) => format!("cmd:{}", p.display()),
        }
    }
}
