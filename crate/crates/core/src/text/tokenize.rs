//! Whitespace-and-punctuation tokenizer. Alphanumeric runs stay together,
//! every other non-space character is a standalone token, and byte offsets
//! always reconstruct the source.

use crate::text::token::Token;

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run_start: Option<usize> = None;
    for (pos, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            if run_start.is_none() {
                run_start = Some(pos);
            }
        } else {
            if let Some(start) = run_start.take() {
                tokens.push(Token::raw(&text[start..pos], start, pos));
            }
            if !ch.is_whitespace() {
                let end = pos + ch.len_utf8();
                tokens.push(Token::raw(&text[pos..end], pos, end));
            }
        }
    }
    if let Some(start) = run_start {
        tokens.push(Token::raw(&text[start..], start, text.len()));
    }
    tokens
}
