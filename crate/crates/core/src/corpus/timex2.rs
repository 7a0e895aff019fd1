//! Parser for WikiWars-style TIMEX2 markup: TIMEX2 tags become recorded
//! spans with byte offsets into the de-tagged text, every other tag is
//! stripped, and the running text is preserved exactly.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// One annotated temporal expression. `val` is the TIMEX2 value attribute,
/// captured verbatim but never interpreted downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimexSpan {
    pub char_start: usize,
    pub char_end: usize,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub val: Option<String>,
}

/// Plain text plus its timex spans, before paragraph splitting.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDocument {
    pub text: String,
    pub timexes: Vec<TimexSpan>,
}

/// A paragraph skeleton: text and spans, no annotations yet.
#[derive(Debug, Clone, PartialEq)]
pub struct ParagraphSkeleton {
    pub text: String,
    pub timexes: Vec<TimexSpan>,
}

fn is_timex2_open(tag_body: &str) -> bool {
    let name = tag_body
        .split(|c: char| c.is_whitespace() || c == '>')
        .next()
        .unwrap_or("");
    name.eq_ignore_ascii_case("TIMEX2")
}

fn extract_val(tag_body: &str) -> Option<String> {
    let lower = tag_body.to_ascii_lowercase();
    let at = lower.find("val=\"")?;
    let rest = &tag_body[at + 5..];
    let end = rest.find('"')?;
    Some(rest[..end].to_string())
}

/// De-tag the document. TIMEX2 open/close pairs produce spans; nesting is
/// rejected (the corpus never nests them) and an unclosed tag is an error
/// carrying its byte position in the original markup.
pub fn parse_timex2(xml_text: &str) -> Result<ParsedDocument> {
    let mut text = String::with_capacity(xml_text.len());
    let mut timexes = Vec::new();
    let mut open: Option<(usize, Option<String>, usize)> = None; // (out offset, val, src pos)
    let bytes = xml_text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            let close = xml_text[i..]
                .find('>')
                .map(|p| i + p)
                .ok_or(CoreError::ParseBytePos {
                    position: i,
                    msg: "unterminated tag".into(),
                })?;
            let body = &xml_text[i + 1..close];
            if let Some(inner) = body.strip_prefix('/') {
                if inner.trim().eq_ignore_ascii_case("TIMEX2") {
                    let (start, val, _) = open.take().ok_or(CoreError::ParseBytePos {
                        position: i,
                        msg: "closing TIMEX2 without an open tag".into(),
                    })?;
                    timexes.push(TimexSpan {
                        char_start: start,
                        char_end: text.len(),
                        text: text[start..].to_string(),
                        val,
                    });
                }
                // other closing tags are stripped silently
            } else if is_timex2_open(body) {
                if open.is_some() {
                    return Err(CoreError::ParseBytePos {
                        position: i,
                        msg: "nested TIMEX2 tags".into(),
                    });
                }
                open = Some((text.len(), extract_val(body), i));
            }
            // every tag disappears from the running text
            i = close + 1;
        } else {
            let ch = xml_text[i..].chars().next().expect("in-bounds char");
            text.push(ch);
            i += ch.len_utf8();
        }
    }
    if let Some((_, _, src_pos)) = open {
        return Err(CoreError::ParseBytePos {
            position: src_pos,
            msg: "unclosed TIMEX2 tag".into(),
        });
    }
    Ok(ParsedDocument { text, timexes })
}

/// Split a parsed document into paragraph skeletons at blank lines,
/// re-basing span offsets and dropping empty paragraphs.
pub fn split_paragraphs(doc: &ParsedDocument) -> Vec<ParagraphSkeleton> {
    let mut paragraphs = Vec::new();
    let mut block_start = 0usize;
    let push_block = |start: usize, end: usize, out: &mut Vec<ParagraphSkeleton>| {
        let raw = &doc.text[start..end];
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return;
        }
        let lead = raw.find(trimmed).unwrap_or(0);
        let abs_start = start + lead;
        let abs_end = abs_start + trimmed.len();
        let timexes = doc
            .timexes
            .iter()
            .filter(|s| s.char_start >= abs_start && s.char_end <= abs_end)
            .map(|s| TimexSpan {
                char_start: s.char_start - abs_start,
                char_end: s.char_end - abs_start,
                text: s.text.clone(),
                val: s.val.clone(),
            })
            .collect();
        out.push(ParagraphSkeleton {
            text: trimmed.to_string(),
            timexes,
        });
    };

    let mut last_newline: Option<usize> = None;
    for (pos, ch) in doc.text.char_indices() {
        if ch == '\n' {
            if let Some(prev) = last_newline {
                if doc.text[prev + 1..pos].trim().is_empty() {
                    push_block(block_start, prev, &mut paragraphs);
                    block_start = pos + 1;
                }
            }
            last_newline = Some(pos);
        } else if !ch.is_whitespace() {
            last_newline = None;
        }
    }
    push_block(block_start, doc.text.len(), &mut paragraphs);
    paragraphs
}

/// Re-insert TIMEX2 tags at recorded offsets; inverse of `parse_timex2`
/// for input that contained only TIMEX2 markup.
pub fn render_with_tags(doc: &ParsedDocument) -> String {
    let mut out = String::with_capacity(doc.text.len() + doc.timexes.len() * 24);
    let mut cursor = 0usize;
    for span in &doc.timexes {
        out.push_str(&doc.text[cursor..span.char_start]);
        match &span.val {
            Some(v) => out.push_str(&format!("<TIMEX2 val=\"{v}\">")),
            None => out.push_str("<TIMEX2>"),
        }
        out.push_str(&doc.text[span.char_start..span.char_end]);
        out.push_str("</TIMEX2>");
        cursor = span.char_end;
    }
    out.push_str(&doc.text[cursor..]);
    out
}
