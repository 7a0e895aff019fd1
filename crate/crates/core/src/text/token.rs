//! Annotated token and the closed POS/NER tagsets.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Coarse part-of-speech tagset. One-hot width is [`POS_WIDTH`]; the five
/// slots past `X` are reserved so gold annotations from richer tagsets can
/// be mapped in later without resizing feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Num,
    Conj,
    Prt,
    Punct,
    X,
}

pub const POS_WIDTH: usize = 17;

pub const POS_TAGS: [PosTag; 12] = [
    PosTag::Noun,
    PosTag::Verb,
    PosTag::Adj,
    PosTag::Adv,
    PosTag::Pron,
    PosTag::Det,
    PosTag::Adp,
    PosTag::Num,
    PosTag::Conj,
    PosTag::Prt,
    PosTag::Punct,
    PosTag::X,
];

impl PosTag {
    pub fn index(self) -> usize {
        POS_TAGS.iter().position(|t| *t == self).expect("closed set")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        match upper.as_str() {
            "NOUN" => Ok(PosTag::Noun),
            "VERB" => Ok(PosTag::Verb),
            "ADJ" => Ok(PosTag::Adj),
            "ADV" => Ok(PosTag::Adv),
            "PRON" => Ok(PosTag::Pron),
            "DET" => Ok(PosTag::Det),
            "ADP" => Ok(PosTag::Adp),
            "NUM" => Ok(PosTag::Num),
            "CONJ" => Ok(PosTag::Conj),
            "PRT" => Ok(PosTag::Prt),
            "PUNCT" => Ok(PosTag::Punct),
            "X" => Ok(PosTag::X),
            _ => Err(CoreError::UnknownTag(s.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron => "PRON",
            PosTag::Det => "DET",
            PosTag::Adp => "ADP",
            PosTag::Num => "NUM",
            PosTag::Conj => "CONJ",
            PosTag::Prt => "PRT",
            PosTag::Punct => "PUNCT",
            PosTag::X => "X",
        }
    }
}

/// Entity tagset. The fallback recognizer only ever emits the temporal
/// tags (DATE, TIME, DURATION) and O; the remaining tags exist so gold
/// annotations that use them survive a round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NerTag {
    Date,
    Time,
    Duration,
    Cardinal,
    Person,
    Loc,
    Org,
    O,
}

pub const NER_WIDTH: usize = 8;

pub const NER_TAGS: [NerTag; 8] = [
    NerTag::Date,
    NerTag::Time,
    NerTag::Duration,
    NerTag::Cardinal,
    NerTag::Person,
    NerTag::Loc,
    NerTag::Org,
    NerTag::O,
];

impl NerTag {
    pub fn index(self) -> usize {
        NER_TAGS.iter().position(|t| *t == self).expect("closed set")
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DATE" => Ok(NerTag::Date),
            "TIME" => Ok(NerTag::Time),
            "DURATION" => Ok(NerTag::Duration),
            "CARDINAL" => Ok(NerTag::Cardinal),
            "PERSON" => Ok(NerTag::Person),
            "LOC" => Ok(NerTag::Loc),
            "ORG" => Ok(NerTag::Org),
            "O" => Ok(NerTag::O),
            _ => Err(CoreError::UnknownTag(s.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NerTag::Date => "DATE",
            NerTag::Time => "TIME",
            NerTag::Duration => "DURATION",
            NerTag::Cardinal => "CARDINAL",
            NerTag::Person => "PERSON",
            NerTag::Loc => "LOC",
            NerTag::Org => "ORG",
            NerTag::O => "O",
        }
    }
}

/// A surface token with its annotations and byte offsets into the source
/// paragraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub lemma: String,
    pub pos: PosTag,
    pub ner: NerTag,
    pub tfidf: f32,
    pub char_start: usize,
    pub char_end: usize,
}

impl Token {
    /// Bare token straight out of the tokenizer; annotations get filled by
    /// the later pipeline stages.
    pub fn raw(text: &str, char_start: usize, char_end: usize) -> Self {
        Token {
            lower: text.to_lowercase(),
            lemma: text.to_lowercase(),
            text: text.to_string(),
            pos: PosTag::X,
            ner: NerTag::O,
            tfidf: 0.0,
            char_start,
            char_end,
        }
    }
}

/// The exact source slice covering tokens `start..=end`, gaps included.
pub fn detokenize(source: &str, tokens: &[Token], start: usize, end: usize) -> String {
    source[tokens[start].char_start..tokens[end].char_end].to_string()
}
