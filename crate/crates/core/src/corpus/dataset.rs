//! JSON-lines dataset schema, loader, and validator. One object per QA
//! example; paragraphs repeat across their questions and are deduplicated
//! on load. Optional token annotations override the fallback pipeline.

use crate::corpus::timex2::TimexSpan;
use crate::error::{CoreError, Result};
use crate::text::{self, detokenize, NerTag, PosTag, Token};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTimex {
    pub start: usize,
    pub end: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawToken {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner: Option<String>,
}

/// On-disk record. Field order here is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecord {
    pub doc_id: String,
    pub para_id: String,
    pub paragraph_text: String,
    pub timexes: Vec<RawTimex>,
    pub question: String,
    pub answer_token_start: usize,
    pub answer_token_end: usize,
    pub answer_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<RawToken>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_tokens: Option<Vec<RawToken>>,
}

/// A fully annotated paragraph shared by its questions.
#[derive(Debug, Clone, PartialEq)]
pub struct Paragraph {
    pub doc_id: String,
    pub para_id: String,
    pub text: String,
    pub timexes: Vec<TimexSpan>,
    pub tokens: Vec<Token>,
}

impl Paragraph {
    pub fn key(&self) -> (String, String) {
        (self.doc_id.clone(), self.para_id.clone())
    }
}

/// One question over a paragraph with its gold token span (inclusive).
#[derive(Debug, Clone)]
pub struct QAExample {
    pub paragraph: Arc<Paragraph>,
    pub question_text: String,
    pub question_tokens: Vec<Token>,
    pub answer_start: usize,
    pub answer_end: usize,
    pub answer_text: String,
}

/// Normalized records plus their validated, annotated examples.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub records: Vec<RawRecord>,
    pub examples: Vec<QAExample>,
}

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> CoreError {
    CoreError::ParseAt {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Align externally supplied tokens against the source text, recovering
/// byte offsets. Tokens must appear left to right separated only by
/// whitespace.
fn align_tokens(source: &str, raws: &[RawToken]) -> std::result::Result<Vec<Token>, String> {
    let mut out = Vec::with_capacity(raws.len());
    let mut cursor = 0usize;
    for (k, raw) in raws.iter().enumerate() {
        let rest = &source[cursor..];
        let skip = rest.len() - rest.trim_start().len();
        let start = cursor + skip;
        if !source[start..].starts_with(&raw.text) {
            return Err(format!(
                "token #{k} '{}' does not align with source text at byte {start}",
                raw.text
            ));
        }
        let end = start + raw.text.len();
        out.push(Token::raw(&raw.text, start, end));
        cursor = end;
    }
    if !source[cursor..].trim().is_empty() {
        return Err(format!(
            "supplied tokens leave unconsumed text at byte {cursor}"
        ));
    }
    Ok(out)
}

/// Merge gold annotations over the fallback pipeline's output.
fn annotate_with_overrides(tokens: &mut [Token], raws: Option<&[RawToken]>) -> Result<()> {
    text::annotate_tokens(tokens);
    if let Some(raws) = raws {
        for (t, raw) in tokens.iter_mut().zip(raws) {
            if let Some(lemma) = &raw.lemma {
                t.lemma = lemma.clone();
            }
            if let Some(pos) = &raw.pos {
                t.pos = PosTag::parse(pos)?;
            }
            if let Some(ner) = &raw.ner {
                t.ner = NerTag::parse(ner)?;
            }
        }
    }
    Ok(())
}

/// Snap a byte span outward to covering token boundaries. Returns the
/// snapped span and whether it moved.
fn snap_to_tokens(
    tokens: &[Token],
    start: usize,
    end: usize,
) -> std::result::Result<(usize, usize, bool), String> {
    if start >= end {
        return Err(format!("empty span {start}..{end}"));
    }
    // Start goes to the first overlapped token's start (outward when the
    // byte is mid-token, inward past leading whitespace otherwise); end
    // mirrors that on the last overlapped token.
    let new_start = match tokens.iter().find(|t| t.char_end > start) {
        Some(t) => t.char_start,
        None => return Err(format!("span {start}..{end} covers no token")),
    };
    let new_end = match tokens.iter().rev().find(|t| t.char_start < end) {
        Some(t) => t.char_end,
        None => return Err(format!("span {start}..{end} covers no token")),
    };
    if new_start >= new_end {
        return Err(format!("span {start}..{end} covers no token"));
    }
    Ok((new_start, new_end, new_start != start || new_end != end))
}

impl Dataset {
    pub fn load(path: &Path) -> Result<Dataset> {
        let content = fs::read_to_string(path)?;
        Self::parse(&content, &path.display().to_string())
    }

    /// Parse and validate JSONL content. `label` names the source in
    /// errors (a path, usually).
    pub fn parse(content: &str, label: &str) -> Result<Dataset> {
        let mut records = Vec::new();
        for (idx, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: RawRecord = serde_json::from_str(line)
                .map_err(|e| parse_err(label, idx + 1, e.to_string()))?;
            records.push((idx + 1, record));
        }
        Self::from_numbered_records(records, label)
    }

    pub fn from_records(records: Vec<RawRecord>, label: &str) -> Result<Dataset> {
        Self::from_numbered_records(
            records.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect(),
            label,
        )
    }

    fn from_numbered_records(
        mut numbered: Vec<(usize, RawRecord)>,
        label: &str,
    ) -> Result<Dataset> {
        let mut paragraphs: BTreeMap<(String, String), Arc<Paragraph>> = BTreeMap::new();
        let mut examples = Vec::with_capacity(numbered.len());

        for (line, record) in numbered.iter_mut() {
            let line = *line;
            let key = (record.doc_id.clone(), record.para_id.clone());
            let paragraph = match paragraphs.get(&key) {
                Some(p) => {
                    if p.text != record.paragraph_text {
                        return Err(parse_err(
                            label,
                            line,
                            format!(
                                "paragraph {}/{} re-appears with different text",
                                key.0, key.1
                            ),
                        ));
                    }
                    // normalize this record's spans to the canonical ones
                    record.timexes = timexes_to_raw(&p.timexes);
                    Arc::clone(p)
                }
                None => {
                    let p = Arc::new(build_paragraph(record, label, line)?);
                    record.timexes = timexes_to_raw(&p.timexes);
                    paragraphs.insert(key.clone(), Arc::clone(&p));
                    p
                }
            };

            let m = paragraph.tokens.len();
            if record.answer_token_start > record.answer_token_end
                || record.answer_token_end >= m
            {
                return Err(parse_err(
                    label,
                    line,
                    format!(
                        "answer span {}..={} out of range for {m} tokens",
                        record.answer_token_start, record.answer_token_end
                    ),
                ));
            }
            let gold_slice = detokenize(
                &paragraph.text,
                &paragraph.tokens,
                record.answer_token_start,
                record.answer_token_end,
            );
            if gold_slice != record.answer_text {
                return Err(parse_err(
                    label,
                    line,
                    format!(
                        "answer_text mismatch: record says {:?}, paragraph slice is {:?}",
                        record.answer_text, gold_slice
                    ),
                ));
            }

            let has_timexes = !paragraph.timexes.is_empty();
            if has_timexes {
                let a_start = paragraph.tokens[record.answer_token_start].char_start;
                let a_end = paragraph.tokens[record.answer_token_end].char_end;
                let overlaps = paragraph
                    .timexes
                    .iter()
                    .any(|s| s.char_start < a_end && a_start < s.char_end);
                if !overlaps {
                    log::warn!(
                        "{label}:{line}: answer span does not overlap any timex in {}/{}",
                        paragraph.doc_id,
                        paragraph.para_id
                    );
                }
            }

            let mut question_tokens = match &record.question_tokens {
                Some(raws) => align_tokens(&record.question, raws)
                    .map_err(|e| parse_err(label, line, e))?,
                None => text::tokenize(&record.question),
            };
            annotate_with_overrides(&mut question_tokens, record.question_tokens.as_deref())
                .map_err(|e| parse_err(label, line, e.to_string()))?;

            examples.push(QAExample {
                paragraph,
                question_text: record.question.clone(),
                question_tokens,
                answer_start: record.answer_token_start,
                answer_end: record.answer_token_end,
                answer_text: record.answer_text.clone(),
            });
        }

        Ok(Dataset {
            records: numbered.into_iter().map(|(_, r)| r).collect(),
            examples,
        })
    }

    /// Canonical serialization: one compact JSON object per line.
    pub fn to_jsonl(&self) -> Result<String> {
        records_to_jsonl(&self.records)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }

    pub fn paragraphs(&self) -> Vec<Arc<Paragraph>> {
        let mut seen = BTreeMap::new();
        for e in &self.examples {
            seen.entry(e.paragraph.key())
                .or_insert_with(|| Arc::clone(&e.paragraph));
        }
        seen.into_values().collect()
    }
}

pub fn records_to_jsonl(records: &[RawRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

fn timexes_to_raw(spans: &[TimexSpan]) -> Vec<RawTimex> {
    spans
        .iter()
        .map(|s| RawTimex {
            start: s.char_start,
            end: s.char_end,
            text: s.text.clone(),
            val: s.val.clone(),
        })
        .collect()
}

fn build_paragraph(record: &RawRecord, label: &str, line: usize) -> Result<Paragraph> {
    let mut tokens = match &record.tokens {
        Some(raws) => align_tokens(&record.paragraph_text, raws)
            .map_err(|e| parse_err(label, line, e))?,
        None => text::tokenize(&record.paragraph_text),
    };
    annotate_with_overrides(&mut tokens, record.tokens.as_deref())
        .map_err(|e| parse_err(label, line, e.to_string()))?;

    let mut timexes = Vec::with_capacity(record.timexes.len());
    for raw in &record.timexes {
        if raw.end > record.paragraph_text.len() || raw.start >= raw.end {
            return Err(parse_err(
                label,
                line,
                format!("timex span {}..{} out of bounds", raw.start, raw.end),
            ));
        }
        let (start, end, moved) = snap_to_tokens(&tokens, raw.start, raw.end)
            .map_err(|e| parse_err(label, line, e))?;
        if moved {
            log::warn!(
                "{label}:{line}: timex span {}..{} snapped to token boundaries {start}..{end}",
                raw.start,
                raw.end
            );
        }
        let text_slice = record.paragraph_text[start..end].to_string();
        if !moved && text_slice != raw.text {
            return Err(parse_err(
                label,
                line,
                format!(
                    "timex text mismatch: record says {:?}, paragraph slice is {:?}",
                    raw.text, text_slice
                ),
            ));
        }
        timexes.push(TimexSpan {
            char_start: start,
            char_end: end,
            text: text_slice,
            val: raw.val.clone(),
        });
    }
    timexes.sort_by_key(|s| s.char_start);
    for pair in timexes.windows(2) {
        if pair[1].char_start < pair[0].char_end {
            return Err(parse_err(
                label,
                line,
                format!(
                    "overlapping timex spans {}..{} and {}..{}",
                    pair[0].char_start, pair[0].char_end, pair[1].char_start, pair[1].char_end
                ),
            ));
        }
    }

    Ok(Paragraph {
        doc_id: record.doc_id.clone(),
        para_id: record.para_id.clone(),
        text: record.paragraph_text.clone(),
        timexes,
        tokens,
    })
}
