use serde::{Deserialize, Serialize};

/// Collins-style wordtype: uppercase letters become `A`, lowercase `a`,
/// ASCII digits `0`; every other character is kept as is.
pub fn wordtype(token: &str) -> String {
    token
        .chars()
        .map(|c| {
            if c.is_uppercase() {
                'A'
            } else if c.is_lowercase() {
                'a'
            } else if c.is_ascii_digit() {
                '0'
            } else {
                c
            }
        })
        .collect()
}

/// A single wordtype looks like a name: it starts with `A` or is all `A`.
pub fn wordtype_qualifies(wt: &str) -> bool {
    wt.starts_with('A') || (!wt.is_empty() && wt.chars().all(|c| c == 'A'))
}

/// How per-token judgements combine into one expression-level score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Any,
    All,
    First,
}

impl Aggregation {
    pub fn combine<I: IntoIterator<Item = bool>>(self, flags: I) -> bool {
        let mut it = flags.into_iter();
        match self {
            Aggregation::Any => it.any(|f| f),
            Aggregation::All => it.all(|f| f),
            Aggregation::First => it.next().unwrap_or(false),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Any => "any",
            Aggregation::All => "all",
            Aggregation::First => "first",
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Aggregation::Any),
            "all" => Ok(Aggregation::All),
            "first" => Ok(Aggregation::First),
            other => Err(format!("unknown aggregation {other:?} (any|all|first)")),
        }
    }
}

/// 1 when the aggregated wordtypes qualify, else 0.
pub fn wordtype_score(wordtypes: &[String], agg: Aggregation) -> u8 {
    u8::from(agg.combine(wordtypes.iter().map(|w| wordtype_qualifies(w))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_examples() {
        assert_eq!(wordtype("Delhi"), "Aaaaa");
        assert_eq!(wordtype("BJP"), "AAA");
        assert_eq!(wordtype("2014"), "0000");
    }

    #[test]
    fn other_characters_pass_through() {
        assert_eq!(wordtype("U.P."), "A.A.");
        assert_eq!(wordtype("Kabir's"), "Aaaaa'a");
        assert_eq!(wordtype("Rāmāyaṇa"), "Aaaaaaaa");
        assert_eq!(wordtype("दिल्ली"), "दिल्ली");
    }

    #[test]
    fn qualification() {
        assert!(wordtype_qualifies("Aaaaa"));
        assert!(wordtype_qualifies("AAA"));
        assert!(wordtype_qualifies("A.A."));
        assert!(!wordtype_qualifies("aaaa"));
        assert!(!wordtype_qualifies("0000"));
        assert!(!wordtype_qualifies(""));
    }

    #[test]
    fn expression_scores() {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(wordtype_score(&v(&["Aaaaa"]), Aggregation::All), 1);
        assert_eq!(wordtype_score(&v(&["AAA"]), Aggregation::All), 1);
        assert_eq!(wordtype_score(&v(&["Aaa", "aaaa"]), Aggregation::All), 0);
        assert_eq!(wordtype_score(&v(&["Aaa", "aaaa"]), Aggregation::Any), 1);
        assert_eq!(wordtype_score(&v(&["aa", "Aaaa"]), Aggregation::First), 0);
    }
}
