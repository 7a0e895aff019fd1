//! Deterministic template generator for desk-scale datasets: history-style
//! paragraphs, one embedded temporal expression each, and exactly three
//! paraphrased questions per expression.

use crate::corpus::dataset::{RawRecord, RawTimex};
use crate::text::tokenize;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Actor {
    subject: &'static str,
    /// surface used inside questions, phrased differently from the text
    alias: &'static str,
}

struct Verb {
    past: &'static str,
    base: &'static str,
    /// synonym for paraphrased questions
    synonym: &'static str,
    passive: &'static str,
}

const ACTORS: [Actor; 10] = [
    Actor { subject: "the Prussian army", alias: "the Prussians" },
    Actor { subject: "General Moreau", alias: "Moreau" },
    Actor { subject: "the coalition forces", alias: "the coalition" },
    Actor { subject: "the royal family", alias: "the royals" },
    Actor { subject: "Emperor Charles", alias: "the emperor" },
    Actor { subject: "the rebel militia", alias: "the rebels" },
    Actor { subject: "Admiral Keyes", alias: "the admiral" },
    Actor { subject: "the northern legion", alias: "the legion" },
    Actor { subject: "King Philip", alias: "the king" },
    Actor { subject: "the besieging army", alias: "the besiegers" },
];

const VERBS: [Verb; 6] = [
    Verb { past: "attacked", base: "attack", synonym: "assault", passive: "attacked" },
    Verb { past: "captured", base: "capture", synonym: "seize", passive: "captured" },
    Verb { past: "besieged", base: "besiege", synonym: "surround", passive: "besieged" },
    Verb { past: "liberated", base: "liberate", synonym: "free", passive: "liberated" },
    Verb { past: "entered", base: "enter", synonym: "reach", passive: "entered" },
    Verb { past: "abandoned", base: "abandon", synonym: "leave", passive: "abandoned" },
];

const PLACES: [&str; 10] = [
    "the fortress of Metz",
    "the city of Turin",
    "the port of Calais",
    "the bridge at Arcole",
    "the garrison of Prague",
    "the citadel of Ghent",
    "the village of Austerlitz",
    "the walls of Vienna",
    "the harbour of Brest",
    "the plains of Leipzig",
];

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August",
    "September", "October", "November", "December",
];

const FILLER: [&str; 6] = [
    "The campaign had exhausted both sides and supplies ran low.",
    "Winter made the roads nearly impassable for the artillery.",
    "Negotiations had collapsed weeks earlier without agreement.",
    "The defenders had repaired the breach under constant fire.",
    "Couriers carried conflicting orders between the headquarters.",
    "Morale wavered as rumours of reinforcements spread through the camp.",
];

fn pick_timex(rng: &mut ChaCha20Rng) -> String {
    let year = rng.gen_range(1700..1950);
    match rng.gen_range(0..5u32) {
        0 => format!("{} {} , {}", MONTHS[rng.gen_range(0..12)], rng.gen_range(1..29), year),
        1 => format!("{} {} {}", rng.gen_range(1..29), MONTHS[rng.gen_range(0..12)], year),
        2 => format!("{year}"),
        3 => format!("the following {}", ["day", "week", "month", "year"][rng.gen_range(0..4)]),
        _ => format!(
            "{} {} later",
            ["two", "three", "four", "five", "six"][rng.gen_range(0..5)],
            ["days", "weeks", "months", "years"][rng.gen_range(0..4)]
        ),
    }
}

/// Generate `n_paragraphs` paragraphs, each with one timex and three
/// differently phrased questions whose answer is that timex. Output is a
/// pure function of (n, seed).
pub fn generate_synthetic(n_paragraphs: usize, seed: u64) -> Vec<RawRecord> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_paragraphs * 3);

    for p in 0..n_paragraphs {
        let actor = &ACTORS[rng.gen_range(0..ACTORS.len())];
        let verb = &VERBS[rng.gen_range(0..VERBS.len())];
        let place = PLACES[rng.gen_range(0..PLACES.len())];
        let timex = pick_timex(&mut rng);

        let mut fillers: Vec<&str> = FILLER.to_vec();
        fillers.shuffle(&mut rng);
        let lead = fillers[0];
        let tail = fillers[1];

        // "On <timex> <actor> <verb> <place> ." with distractor sentences
        // around it; sentence order varies so the answer position moves.
        let core = format!("On {timex} {} {} {place} .", actor.subject, verb.past);
        let text = match rng.gen_range(0..3u32) {
            0 => format!("{core} {lead} {tail}"),
            1 => format!("{lead} {core} {tail}"),
            _ => format!("{lead} {tail} {core}"),
        };

        let timex_char_start = text.find(&timex).expect("timex embedded verbatim");
        let timex_char_end = timex_char_start + timex.len();

        let tokens = tokenize(&text);
        let answer_start = tokens
            .iter()
            .position(|t| t.char_start >= timex_char_start)
            .expect("timex is tokenized");
        let answer_end = tokens
            .iter()
            .rposition(|t| t.char_end <= timex_char_end)
            .expect("timex is tokenized");
        let answer_text = text[tokens[answer_start].char_start..tokens[answer_end].char_end]
            .to_string();

        let questions = [
            format!("When did {} {} {place} ?", actor.subject, verb.base),
            format!("On what date did {} {} {place} ?", actor.alias, verb.synonym),
            format!("What was the moment when {place} was {} by {} ?", verb.passive, actor.alias),
        ];

        let doc_id = format!("synth-{:03}", p / 10);
        let para_id = format!("p{p:04}");
        for q in questions {
            records.push(RawRecord {
                doc_id: doc_id.clone(),
                para_id: para_id.clone(),
                paragraph_text: text.clone(),
                timexes: vec![RawTimex {
                    start: timex_char_start,
                    end: timex_char_end,
                    text: timex.clone(),
                    val: None,
                }],
                question: q,
                answer_token_start: answer_start,
                answer_token_end: answer_end,
                answer_text: answer_text.clone(),
                tokens: None,
                question_tokens: None,
            });
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dataset::{records_to_jsonl, Dataset};

    #[test]
    fn deterministic_per_seed() {
        let a = records_to_jsonl(&generate_synthetic(4, 7)).unwrap();
        let b = records_to_jsonl(&generate_synthetic(4, 7)).unwrap();
        assert_eq!(a, b);
        let c = records_to_jsonl(&generate_synthetic(4, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_output_always_loads_cleanly() {
        let records = generate_synthetic(12, 3);
        let ds = Dataset::from_records(records, "synthetic").unwrap();
        assert_eq!(ds.examples.len(), 36);
    }

    #[test]
    fn three_questions_per_timex() {
        let records = generate_synthetic(10, 7);
        let ds = Dataset::from_records(records, "synthetic").unwrap();
        let n_timexes: usize = ds
            .paragraphs()
            .iter()
            .map(|p| p.timexes.len())
            .sum();
        assert_eq!(ds.examples.len() as f64 / n_timexes as f64, 3.0);
    }

    #[test]
    fn every_gold_span_lies_inside_a_timex() {
        let records = generate_synthetic(15, 9);
        let ds = Dataset::from_records(records, "synthetic").unwrap();
        for e in &ds.examples {
            let a_start = e.paragraph.tokens[e.answer_start].char_start;
            let a_end = e.paragraph.tokens[e.answer_end].char_end;
            assert!(
                e.paragraph
                    .timexes
                    .iter()
                    .any(|s| s.char_start <= a_start && a_end <= s.char_end),
                "answer {:?} outside timexes in {:?}",
                e.answer_text,
                e.paragraph.text
            );
        }
    }
}
