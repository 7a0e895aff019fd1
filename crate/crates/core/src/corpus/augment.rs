//! Turn parsed TIMEX2 paragraphs into QA records by generating three
//! paraphrased template questions per temporal expression, anchored on
//! context words near the expression. A stand-in for manual annotation,
//! which this toolkit deliberately does not do.

use crate::corpus::dataset::{RawRecord, RawTimex};
use crate::corpus::timex2::ParagraphSkeleton;
use crate::text::tokenize;

/// Content words around the timex used to anchor the questions.
fn context_anchor(skeleton: &ParagraphSkeleton, timex_index: usize) -> String {
    let tokens = tokenize(&skeleton.text);
    let span = &skeleton.timexes[timex_index];
    let is_content = |lower: &str| {
        lower.chars().any(char::is_alphabetic)
            && ![
                "the", "a", "an", "of", "in", "on", "at", "and", "or", "to", "was", "were",
                "is", "are", "by", "for", "with", "from",
            ]
            .contains(&lower)
    };
    let before: Vec<&str> = tokens
        .iter()
        .filter(|t| t.char_end <= span.char_start && is_content(&t.lower))
        .map(|t| t.text.as_str())
        .collect();
    let after: Vec<&str> = tokens
        .iter()
        .filter(|t| t.char_start >= span.char_end && is_content(&t.lower))
        .map(|t| t.text.as_str())
        .collect();
    // prefer words after the expression, then before, capped at four
    let mut picked: Vec<&str> = after.iter().take(4).copied().collect();
    if picked.len() < 2 {
        picked.extend(before.iter().rev().take(4 - picked.len()).rev());
    }
    if picked.is_empty() {
        "this passage".to_string()
    } else {
        picked.join(" ")
    }
}

/// Records for one paragraph skeleton: three questions per timex. Answer
/// spans are the token ranges covering each expression.
pub fn records_from_skeleton(
    doc_id: &str,
    para_id: &str,
    skeleton: &ParagraphSkeleton,
) -> Vec<RawRecord> {
    let tokens = tokenize(&skeleton.text);
    let mut records = Vec::new();
    for (k, span) in skeleton.timexes.iter().enumerate() {
        let start_tok = tokens.iter().position(|t| t.char_end > span.char_start);
        let end_tok = tokens.iter().rposition(|t| t.char_start < span.char_end);
        let (Some(s), Some(e)) = (start_tok, end_tok) else {
            continue;
        };
        if s > e {
            continue;
        }
        let answer_text = skeleton.text[tokens[s].char_start..tokens[e].char_end].to_string();
        let anchor = context_anchor(skeleton, k);
        let questions = [
            format!("When did the events involving {anchor} take place ?"),
            format!("What was the date connected with {anchor} ?"),
            format!("On what date did the events involving {anchor} occur ?"),
        ];
        for q in questions {
            records.push(RawRecord {
                doc_id: doc_id.to_string(),
                para_id: para_id.to_string(),
                paragraph_text: skeleton.text.clone(),
                timexes: skeleton
                    .timexes
                    .iter()
                    .map(|t| RawTimex {
                        start: t.char_start,
                        end: t.char_end,
                        text: t.text.clone(),
                        val: t.val.clone(),
                    })
                    .collect(),
                question: q,
                answer_token_start: s,
                answer_token_end: e,
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
    use crate::corpus::dataset::Dataset;
    use crate::corpus::timex2::{parse_timex2, split_paragraphs};

    #[test]
    fn augmented_records_load_cleanly() {
        let xml = "On <TIMEX2 val=\"1791-06-20TNI\">the night of 20 June 1791</TIMEX2> the royal family fled the Tuileries. <TIMEX2 val=\"1791-06-21\">The next day</TIMEX2> the King was arrested at Varennes.";
        let doc = parse_timex2(xml).unwrap();
        let skeletons = split_paragraphs(&doc);
        let mut records = Vec::new();
        for (i, sk) in skeletons.iter().enumerate() {
            records.extend(records_from_skeleton("doc0", &format!("p{i}"), sk));
        }
        assert_eq!(records.len(), 6); // 2 timexes x 3 questions
        let ds = Dataset::from_records(records, "augmented").unwrap();
        assert_eq!(ds.examples.len(), 6);
        for e in &ds.examples {
            assert!(!e.answer_text.is_empty());
        }
    }

    #[test]
    fn questions_are_paraphrased_not_identical() {
        let xml = "The fortress fell in <TIMEX2>1809</TIMEX2> after a long siege.";
        let doc = parse_timex2(xml).unwrap();
        let skeletons = split_paragraphs(&doc);
        let records = records_from_skeleton("d", "p0", &skeletons[0]);
        assert_eq!(records.len(), 3);
        assert_ne!(records[0].question, records[1].question);
        assert_ne!(records[1].question, records[2].question);
    }
}
