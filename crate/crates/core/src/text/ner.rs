//! Pattern-based temporal entity recognizer. Patterns are declarative
//! token-sequence matchers shipped as a data file; matching is
//! leftmost-longest, left to right, and non-matches stay O.

use crate::error::{CoreError, Result};
use crate::text::token::{NerTag, Token};
use std::sync::OnceLock;

const PATTERNS_TSV: &str = include_str!("../../data/temporal_patterns.tsv");

/// Typology of the expression a pattern recognizes: fully explicit,
/// resolved against the moment of speaking, or resolved against a
/// reference time in the discourse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimexKind {
    Absolute,
    Deictic,
    Anaphoric,
}

impl TimexKind {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(TimexKind::Absolute),
            "deictic" => Ok(TimexKind::Deictic),
            "anaphoric" => Ok(TimexKind::Anaphoric),
            _ => Err(CoreError::UnknownTag(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenClass {
    Month,
    Weekday,
    Year,
    DayNum,
    Num,
    Ord,
    NumWord,
    Unit,
    Units,
    DayPart,
    Decade,
}

const MONTHS: [&str; 24] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "oct", "nov", "dec", "sept",
];
const WEEKDAYS: [&str; 7] = [
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];
const NUM_WORDS: [&str; 20] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty",
];
const ORD_WORDS: [&str; 12] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
    "tenth", "eleventh", "twelfth",
];
const UNITS_SINGULAR: [&str; 9] = [
    "second", "minute", "hour", "day", "week", "month", "year", "decade", "century",
];
const UNITS_PLURAL: [&str; 9] = [
    "seconds", "minutes", "hours", "days", "weeks", "months", "years", "decades", "centuries",
];
const DAY_PARTS: [&str; 5] = ["night", "morning", "afternoon", "evening", "day"];

impl TokenClass {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "month" => Ok(TokenClass::Month),
            "weekday" => Ok(TokenClass::Weekday),
            "year" => Ok(TokenClass::Year),
            "daynum" => Ok(TokenClass::DayNum),
            "num" => Ok(TokenClass::Num),
            "ord" => Ok(TokenClass::Ord),
            "numword" => Ok(TokenClass::NumWord),
            "unit" => Ok(TokenClass::Unit),
            "units" => Ok(TokenClass::Units),
            "daypart" => Ok(TokenClass::DayPart),
            "decade" => Ok(TokenClass::Decade),
            _ => Err(CoreError::UnknownTag(format!("<{s}>"))),
        }
    }

    fn matches(self, lower: &str) -> bool {
        match self {
            TokenClass::Month => MONTHS.contains(&lower),
            TokenClass::Weekday => WEEKDAYS.contains(&lower),
            TokenClass::Year => {
                lower.len() == 4 && lower.parse::<u32>().map_or(false, |y| (1000..=2999).contains(&y))
            }
            TokenClass::DayNum => lower.parse::<u32>().map_or(false, |d| (1..=31).contains(&d)),
            TokenClass::Num => !lower.is_empty() && lower.chars().all(|c| c.is_ascii_digit()),
            TokenClass::Ord => {
                if ORD_WORDS.contains(&lower) {
                    return true;
                }
                let stripped = lower
                    .strip_suffix("st")
                    .or_else(|| lower.strip_suffix("nd"))
                    .or_else(|| lower.strip_suffix("rd"))
                    .or_else(|| lower.strip_suffix("th"));
                stripped.map_or(false, |d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
            }
            TokenClass::NumWord => NUM_WORDS.contains(&lower),
            TokenClass::Unit => UNITS_SINGULAR.contains(&lower),
            TokenClass::Units => UNITS_PLURAL.contains(&lower),
            TokenClass::DayPart => DAY_PARTS.contains(&lower),
            TokenClass::Decade => lower
                .strip_suffix('s')
                .map_or(false, |y| {
                    y.len() == 4
                        && y.ends_with('0')
                        && y.parse::<u32>().map_or(false, |n| (1000..=2999).contains(&n))
                }),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Matcher {
    Literal(String),
    Class(TokenClass),
}

impl Matcher {
    fn parse(s: &str) -> Result<Self> {
        if let Some(inner) = s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
            Ok(Matcher::Class(TokenClass::parse(inner)?))
        } else {
            Ok(Matcher::Literal(s.to_lowercase()))
        }
    }

    fn matches(&self, lower: &str) -> bool {
        match self {
            Matcher::Literal(lit) => lit == lower,
            Matcher::Class(c) => c.matches(lower),
        }
    }
}

/// One pattern element matches exactly one token via any of its
/// alternatives.
#[derive(Debug, Clone)]
pub struct PatternElem(Vec<Matcher>);

impl PatternElem {
    fn parse(s: &str) -> Result<Self> {
        if let Some(inner) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let alts = inner
                .split('|')
                .map(Matcher::parse)
                .collect::<Result<Vec<_>>>()?;
            Ok(PatternElem(alts))
        } else {
            Ok(PatternElem(vec![Matcher::parse(s)?]))
        }
    }

    fn matches(&self, lower: &str) -> bool {
        self.0.iter().any(|m| m.matches(lower))
    }
}

#[derive(Debug, Clone)]
pub struct TemporalPattern {
    pub name: String,
    pub kind: TimexKind,
    pub tag: NerTag,
    pub elems: Vec<PatternElem>,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
}

impl TemporalPattern {
    /// Number of tokens matched when the whole pattern applies at `start`.
    pub fn match_at(&self, lowers: &[&str], start: usize) -> Option<usize> {
        if start + self.elems.len() > lowers.len() {
            return None;
        }
        for (k, elem) in self.elems.iter().enumerate() {
            if !elem.matches(lowers[start + k]) {
                return None;
            }
        }
        Some(self.elems.len())
    }
}

fn parse_patterns(tsv: &str) -> Result<Vec<TemporalPattern>> {
    let mut patterns = Vec::new();
    for (lineno, line) in tsv.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(CoreError::ParseAt {
                path: "temporal_patterns.tsv".into(),
                line: lineno + 1,
                msg: format!("expected 6 tab-separated columns, got {}", cols.len()),
            });
        }
        let elems = cols[3]
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(PatternElem::parse)
            .collect::<Result<Vec<_>>>()?;
        patterns.push(TemporalPattern {
            name: cols[0].to_string(),
            kind: TimexKind::parse(cols[1])?,
            tag: NerTag::parse(cols[2])?,
            elems,
            positives: cols[4].split(';').map(str::to_string).collect(),
            negatives: cols[5].split(';').map(str::to_string).collect(),
        });
    }
    Ok(patterns)
}

/// The built-in pattern set.
pub fn default_patterns() -> &'static [TemporalPattern] {
    static PATTERNS: OnceLock<Vec<TemporalPattern>> = OnceLock::new();
    PATTERNS.get_or_init(|| parse_patterns(PATTERNS_TSV).expect("shipped pattern file parses"))
}

/// Tag every token. Longest match first, left to right; overlaps resolve
/// leftmost-longest; ties between equally long matches go to the earliest
/// pattern in the file.
pub fn temporal_ner(tokens: &[Token], patterns: &[TemporalPattern]) -> Vec<NerTag> {
    let lowers: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
    let mut tags = vec![NerTag::O; tokens.len()];
    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<(usize, NerTag)> = None;
        for p in patterns {
            if let Some(len) = p.match_at(&lowers, i) {
                if best.map_or(true, |(blen, _)| len > blen) {
                    best = Some((len, p.tag));
                }
            }
        }
        match best {
            Some((len, tag)) => {
                for t in tags.iter_mut().skip(i).take(len) {
                    *t = tag;
                }
                i += len;
            }
            None => i += 1,
        }
    }
    tags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize::tokenize;

    fn run(text: &str) -> Vec<NerTag> {
        temporal_ner(&tokenize(text), default_patterns())
    }

    #[test]
    fn full_date_phrase_is_all_date() {
        let tags = run("the night of 20 June 1791");
        assert_eq!(tags.len(), 6);
        assert!(tags.iter().all(|t| *t == NerTag::Date));
    }

    #[test]
    fn plain_sentence_is_all_o() {
        let tags = run("the king was arrested");
        assert!(tags.iter().all(|t| *t == NerTag::O));
    }

    #[test]
    fn deictic_wins_by_leftmost_longest() {
        // The 2-token duration match and the 3-token deictic match both
        // start at 0; the longer one covers the trigram.
        let tags = run("two weeks ago");
        assert_eq!(tags, [NerTag::Date, NerTag::Date, NerTag::Date]);
    }

    /// Brute-force enumeration oracle for leftmost-longest resolution.
    #[test]
    fn matches_brute_force_resolution_on_trigram() {
        let tokens = tokenize("two weeks ago");
        let lowers: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
        let patterns = default_patterns();

        // All (start, len, tag) matches anywhere in the trigram.
        let mut all: Vec<(usize, usize, NerTag)> = Vec::new();
        for p in patterns {
            for start in 0..lowers.len() {
                if let Some(len) = p.match_at(&lowers, start) {
                    all.push((start, len, p.tag));
                }
            }
        }
        // Resolve independently: scan left to right, prefer longest.
        let mut expected = vec![NerTag::O; lowers.len()];
        let mut i = 0;
        while i < lowers.len() {
            let best = all
                .iter()
                .filter(|(s, _, _)| *s == i)
                .max_by_key(|(_, len, _)| *len);
            if let Some(&(_, len, tag)) = best {
                for t in expected.iter_mut().skip(i).take(len) {
                    *t = tag;
                }
                i += len;
            } else {
                i += 1;
            }
        }
        assert_eq!(temporal_ner(&tokens, patterns), expected);
    }

    #[test]
    fn output_length_equals_input_length() {
        for text in ["", "a", "on 7 August 1914 the war began", "no dates here at all"] {
            let tokens = tokenize(text);
            assert_eq!(temporal_ner(&tokens, default_patterns()).len(), tokens.len());
        }
    }

    /// Every shipped pattern matches its positive examples in full and
    /// rejects its negatives.
    #[test]
    fn shipped_patterns_pass_their_self_tests() {
        for p in default_patterns() {
            assert!(!p.positives.is_empty(), "{} has no positives", p.name);
            for pos in &p.positives {
                let tokens = tokenize(pos);
                let lowers: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
                assert_eq!(
                    p.match_at(&lowers, 0),
                    Some(tokens.len()),
                    "pattern {} should fully match positive '{pos}'",
                    p.name
                );
            }
            for neg in &p.negatives {
                let tokens = tokenize(neg);
                let lowers: Vec<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
                assert_ne!(
                    p.match_at(&lowers, 0),
                    Some(tokens.len()),
                    "pattern {} must reject negative '{neg}'",
                    p.name
                );
            }
        }
    }

    #[test]
    fn year_range_bounds() {
        assert_eq!(run("1000"), [NerTag::Date]);
        assert_eq!(run("2999"), [NerTag::Date]);
        assert_eq!(run("999"), [NerTag::O]);
        assert_eq!(run("3000"), [NerTag::O]);
    }
}
