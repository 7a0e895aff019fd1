//! Span decoding. Raw mode takes the two argmaxes independently, which
//! can put the end before the start; constrained mode maximizes the pair
//! product over ordered spans up to a length cap.

use crate::nn::tensor::Tensor;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMode {
    RawArgmax,
    Constrained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanPrediction {
    pub start: usize,
    pub end: usize,
    pub start_prob: f32,
    pub end_prob: f32,
    pub mode: DecodeMode,
}

/// Decode one example's distributions. Constrained ties break to the
/// smallest start, then the smallest end.
pub fn decode_span(
    p_start: &Tensor<f32>,
    p_end: &Tensor<f32>,
    mode: DecodeMode,
    max_span_len: usize,
) -> SpanPrediction {
    debug_assert_eq!(p_start.len(), p_end.len());
    match mode {
        DecodeMode::RawArgmax => {
            let s = p_start.argmax();
            let e = p_end.argmax();
            SpanPrediction {
                start: s,
                end: e,
                start_prob: p_start.data()[s],
                end_prob: p_end.data()[e],
                mode,
            }
        }
        DecodeMode::Constrained => {
            let m = p_start.len();
            let mut best = (0usize, 0usize, f32::NEG_INFINITY);
            for i in 0..m {
                for j in i..m.min(i + max_span_len + 1) {
                    let score = p_start.data()[i] * p_end.data()[j];
                    if score > best.2 {
                        best = (i, j, score);
                    }
                }
            }
            SpanPrediction {
                start: best.0,
                end: best.1,
                start_prob: p_start.data()[best.0],
                end_prob: p_end.data()[best.1],
                mode,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[f32]) -> Tensor<f32> {
        Tensor::vector(v.to_vec())
    }

    #[test]
    fn agreeing_distributions() {
        let ps = t(&[0.7, 0.3]);
        let pe = t(&[0.3, 0.7]);
        let raw = decode_span(&ps, &pe, DecodeMode::RawArgmax, 15);
        assert_eq!((raw.start, raw.end), (0, 1));
        let con = decode_span(&ps, &pe, DecodeMode::Constrained, 15);
        assert_eq!((con.start, con.end), (0, 1));
    }

    #[test]
    fn raw_mode_reproduces_end_before_start() {
        let ps = t(&[0.3, 0.7]);
        let pe = t(&[0.7, 0.3]);
        let raw = decode_span(&ps, &pe, DecodeMode::RawArgmax, 15);
        assert_eq!((raw.start, raw.end), (1, 0));
        assert!(raw.end < raw.start);
        // legal pairs: (0,0)=0.21, (0,1)=0.09, (1,1)=0.21; tie to (0,0)
        let con = decode_span(&ps, &pe, DecodeMode::Constrained, 15);
        assert_eq!((con.start, con.end), (0, 0));
    }

    #[test]
    fn single_token_paragraph() {
        let ps = t(&[1.0]);
        let pe = t(&[1.0]);
        for mode in [DecodeMode::RawArgmax, DecodeMode::Constrained] {
            let p = decode_span(&ps, &pe, mode, 15);
            assert_eq!((p.start, p.end), (0, 0));
        }
    }

    #[test]
    fn constrained_respects_span_cap() {
        // mass concentrated on a pair longer than the cap
        let ps = t(&[0.9, 0.05, 0.05]);
        let pe = t(&[0.05, 0.05, 0.9]);
        let p = decode_span(&ps, &pe, DecodeMode::Constrained, 1);
        assert!(p.end <= p.start + 1);
    }
}
