//! Eager entry points for the basic layer math. These are thin wrappers
//! over the tape so the forward rules live in exactly one place.

use crate::error::{CoreError, Result};
use crate::nn::scalar::Scalar;
use crate::nn::tape::{softmax_value, Activation, Graph};
use crate::nn::tensor::Tensor;

/// W·x + b with optional ReLU.
pub fn dense_forward<S: Scalar>(
    x: &Tensor<S>,
    w: &Tensor<S>,
    b: &Tensor<S>,
    activation: Activation,
) -> Result<Tensor<S>> {
    let mut g = Graph::new();
    let xn = g.constant(x.clone());
    let wn = g.constant(w.clone());
    let bn = g.constant(b.clone());
    let y = g.dense(xn, wn, bn, activation)?;
    Ok(g.value(y).clone())
}

/// Stable masked softmax; masked positions are exactly zero.
pub fn softmax<S: Scalar>(logits: &Tensor<S>, mask: Option<&[bool]>) -> Result<Tensor<S>> {
    softmax_value(logits, mask)
}

/// −log(prob[gold]) over an already-normalized distribution. Zero gold
/// probability is floored at 1e-12 with a warning.
pub fn cross_entropy<S: Scalar>(prob: &Tensor<S>, gold: usize) -> Result<S> {
    let n = prob.len();
    if gold >= n {
        return Err(CoreError::IndexOutOfRange { index: gold, len: n });
    }
    let p = prob.data()[gold].to_f64();
    let p = if p <= 0.0 {
        log::warn!("cross_entropy: gold probability {p} clamped to 1e-12");
        1e-12
    } else {
        p
    };
    Ok(S::from_f64(-p.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_examples() {
        // uniform over 2, gold 0 -> ln 2
        let p = Tensor::vector(vec![0.5f64, 0.5]);
        assert!((cross_entropy(&p, 0).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);

        // perfect prediction -> 0
        let p = Tensor::vector(vec![1.0f64, 0.0, 0.0]);
        assert_eq!(cross_entropy(&p, 0).unwrap(), 0.0);

        // −ln 0.7
        let p = Tensor::vector(vec![0.1f64, 0.2, 0.7]);
        assert!((cross_entropy(&p, 2).unwrap() - 0.35667).abs() < 1e-5);
    }

    #[test]
    fn cross_entropy_out_of_range_and_clamp() {
        let p = Tensor::vector(vec![1.0f64, 0.0]);
        assert!(cross_entropy(&p, 2).is_err());
        let loss = cross_entropy(&p, 1).unwrap();
        assert!((loss - (-(1e-12f64).ln())).abs() < 1e-6);
    }
}
