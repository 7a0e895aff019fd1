//! Rule-based lemmatizer: lowercasing, an exception lexicon shipped as a
//! data file, then ordered suffix rules. Unknown forms come back lowercased.

use crate::text::token::PosTag;
use std::collections::HashMap;
use std::sync::OnceLock;

const EXCEPTIONS_TSV: &str = include_str!("../../data/lemma_exceptions.tsv");

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut map = HashMap::new();
        for line in EXCEPTIONS_TSV.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            if let (Some(form), Some(lemma)) = (parts.next(), parts.next()) {
                map.insert(form, lemma);
            }
        }
        map
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Undo consonant doubling left behind by -ed/-ing stripping
/// ("plann" -> "plan"), except for the doubles English keeps.
fn undo_doubling(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 3 {
        let (a, b) = (chars[n - 2], chars[n - 1]);
        if a == b && !is_vowel(a) && !matches!(a, 'l' | 's' | 'z' | 'f') {
            return stem[..stem.len() - 1].to_string();
        }
    }
    stem.to_string()
}

/// Stems ending in a lone consonant after stripping often lost a final e
/// ("captur" -> "capture"). Heuristic: restore e after consonant+vowel+
/// consonant patterns that are not plain CVC short words.
fn maybe_restore_e(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    if n >= 3 {
        let (a, b, c) = (chars[n - 3], chars[n - 2], chars[n - 1]);
        // e.g. "captur", "declar", "invad": vowel + consonant pair rare
        // word-finally in English lemmas.
        if !is_vowel(c)
            && is_vowel(b)
            && !is_vowel(a)
            && matches!(c, 'r' | 'v' | 'z' | 'c' | 'g' | 'd')
            && n > 4
        {
            return format!("{stem}e");
        }
    }
    stem.to_string()
}

/// Lemmatize one token. Closed-class words (determiners, pronouns,
/// prepositions, conjunctions, particles, punctuation, numbers) are left
/// as their lowercase form.
pub fn lemmatize(token: &str, pos: PosTag) -> String {
    let lower = token.to_lowercase();
    if lower.is_empty() {
        return lower;
    }
    if let Some(lemma) = exceptions().get(lower.as_str()) {
        return (*lemma).to_string();
    }
    if matches!(
        pos,
        PosTag::Det | PosTag::Pron | PosTag::Adp | PosTag::Conj | PosTag::Prt | PosTag::Punct | PosTag::Num
    ) {
        return lower;
    }
    if lower.chars().any(|c| c.is_ascii_digit()) {
        return lower;
    }

    let n = lower.len();
    // -ies -> -y ("flies" -> "fly")
    if n > 4 && lower.ends_with("ies") {
        return format!("{}y", &lower[..n - 3]);
    }
    // -es after sibilants ("boxes" -> "box", "watches" -> "watch")
    if n > 4 && lower.ends_with("es") {
        let stem = &lower[..n - 2];
        if stem.ends_with('s')
            || stem.ends_with('x')
            || stem.ends_with('z')
            || stem.ends_with("ch")
            || stem.ends_with("sh")
        {
            return stem.to_string();
        }
    }
    // plain -s, guarding -ss/-us/-is ("forces" -> "force", "bus" stays)
    if n > 3
        && lower.ends_with('s')
        && !lower.ends_with("ss")
        && !lower.ends_with("us")
        && !lower.ends_with("is")
    {
        return lower[..n - 1].to_string();
    }
    // -ed ("attempted" -> "attempt", "planned" -> "plan", "captured" -> "capture")
    if n > 4 && lower.ends_with("ed") {
        let stem = &lower[..n - 2];
        if stem.ends_with('e') {
            return stem.to_string();
        }
        let undoubled = undo_doubling(stem);
        if undoubled != stem {
            return undoubled;
        }
        return maybe_restore_e(stem);
    }
    // -ing ("running" -> "run", "making" -> "make")
    if n > 5 && lower.ends_with("ing") {
        let stem = &lower[..n - 3];
        let undoubled = undo_doubling(stem);
        if undoubled != stem {
            return undoubled;
        }
        return maybe_restore_e(stem);
    }
    lower
}
