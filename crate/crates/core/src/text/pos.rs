//! Fallback POS tagger: closed-class lexicon lookup, then suffix
//! heuristics, default NOUN. Pre-annotated tags in a dataset always take
//! precedence over this tagger.

use crate::text::token::{PosTag, Token};
use std::collections::HashMap;
use std::sync::OnceLock;

fn lexicon() -> &'static HashMap<&'static str, PosTag> {
    static TABLE: OnceLock<HashMap<&'static str, PosTag>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut m = HashMap::new();
        let det = [
            "the", "a", "an", "this", "that", "these", "those", "some", "any", "each",
            "every", "no", "all", "both", "either", "neither", "another", "such",
        ];
        let pron = [
            "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
            "his", "hers", "its", "their", "theirs", "our", "ours", "my", "your", "who",
            "whom", "whose", "which", "what", "himself", "herself", "itself", "themselves",
        ];
        let adp = [
            "of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "over",
            "under", "between", "among", "through", "during", "against", "before", "after",
            "until", "within", "without", "near", "toward", "towards", "upon", "about",
            "across", "behind", "along", "around",
        ];
        let conj = ["and", "or", "but", "nor", "yet", "so", "because", "although", "while", "if", "when", "since", "as", "that"];
        let prt = ["to", "not", "n't", "'s", "up", "out", "off", "down"];
        let verb = [
            "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had",
            "do", "does", "did", "will", "would", "can", "could", "shall", "should", "may",
            "might", "must", "broke", "began", "fled", "fought", "took", "led", "won",
            "lost", "made", "came", "went", "saw", "met", "held", "sent", "left",
        ];
        let adv = ["very", "also", "however", "then", "there", "here", "now", "again", "still", "never", "always", "often", "later", "soon", "ago"];
        let adj = ["former", "new", "old", "great", "first", "second", "third", "last", "next", "same", "following", "previous", "royal", "secret", "several", "many", "few", "other"];
        for w in det {
            m.insert(w, PosTag::Det);
        }
        for w in pron {
            m.insert(w, PosTag::Pron);
        }
        for w in adp {
            m.insert(w, PosTag::Adp);
        }
        for w in conj {
            m.insert(w, PosTag::Conj);
        }
        for w in prt {
            m.insert(w, PosTag::Prt);
        }
        for w in verb {
            m.insert(w, PosTag::Verb);
        }
        for w in adv {
            m.insert(w, PosTag::Adv);
        }
        for w in adj {
            m.insert(w, PosTag::Adj);
        }
        m
    })
}

pub fn tag_one(lower: &str) -> PosTag {
    if lower.chars().all(|c| !c.is_alphanumeric()) {
        return PosTag::Punct;
    }
    if lower.chars().all(|c| c.is_ascii_digit()) {
        return PosTag::Num;
    }
    if let Some(tag) = lexicon().get(lower) {
        return *tag;
    }
    if lower.len() > 3 {
        if lower.ends_with("ly") {
            return PosTag::Adv;
        }
        // length guard keeps short nouns like "king" out of the verb rule
        if lower.ends_with("ed") || (lower.len() > 5 && lower.ends_with("ing")) {
            return PosTag::Verb;
        }
        if lower.ends_with("tion")
            || lower.ends_with("ness")
            || lower.ends_with("ment")
            || lower.ends_with("ity")
        {
            return PosTag::Noun;
        }
        if lower.ends_with("ous") || lower.ends_with("ful") || lower.ends_with("ive") {
            return PosTag::Adj;
        }
    }
    PosTag::Noun
}

pub fn pos_tag(tokens: &[Token]) -> Vec<PosTag> {
    tokens.iter().map(|t| tag_one(&t.lower)).collect()
}
