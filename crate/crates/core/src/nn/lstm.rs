//! LSTM cell and sequence runner, composed from tape primitives so the
//! reverse pass needs no hand-derived recurrence.
//!
//! Gate layout in the stacked weight matrices and bias is [i, f, g, o]:
//! input gate, forget gate, candidate, output gate.

use crate::error::{CoreError, Result};
use crate::nn::scalar::Scalar;
use crate::nn::store::ParameterStore;
use crate::nn::tape::{Activation, Graph, NodeId};
use crate::nn::tensor::Tensor;
use rand::Rng;

/// Node handles for one direction's weights inside a graph.
#[derive(Debug, Clone, Copy)]
pub struct LstmCell {
    pub w_ih: NodeId,
    pub w_hh: NodeId,
    pub bias: NodeId,
    pub hidden: usize,
}

pub const GATES: usize = 4;

/// Parameter names used for one LSTM direction under `prefix`.
pub fn lstm_param_names(prefix: &str) -> [String; 3] {
    [
        format!("{prefix}.w_ih"),
        format!("{prefix}.w_hh"),
        format!("{prefix}.bias"),
    ]
}

/// Register freshly initialized weights for one direction. The forget-gate
/// bias starts at 1 so early training does not erase cell state.
pub fn register_lstm<S: Scalar, R: Rng>(
    store: &mut ParameterStore<S>,
    prefix: &str,
    input_dim: usize,
    hidden: usize,
    rng: &mut R,
) -> Result<()> {
    let [w_ih, w_hh, bias] = lstm_param_names(prefix);
    let bound_ih = 1.0 / (input_dim as f64).sqrt();
    let bound_hh = 1.0 / (hidden as f64).sqrt();
    store.register(&w_ih, random_tensor(&[GATES * hidden, input_dim], bound_ih, rng))?;
    store.register(&w_hh, random_tensor(&[GATES * hidden, hidden], bound_hh, rng))?;
    let mut b = Tensor::zeros(vec![GATES * hidden]);
    for k in hidden..2 * hidden {
        b.data_mut()[k] = S::ONE;
    }
    store.register(&bias, b)?;
    Ok(())
}

pub fn random_tensor<S: Scalar, R: Rng>(shape: &[usize], bound: f64, rng: &mut R) -> Tensor<S> {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| S::from_f64(rng.gen_range(-bound..bound)))
        .collect();
    Tensor::new(shape.to_vec(), data).expect("shape/data agree by construction")
}

impl LstmCell {
    pub fn from_store<S: Scalar>(
        graph: &mut Graph<S>,
        store: &ParameterStore<S>,
        prefix: &str,
    ) -> Result<Self> {
        let [w_ih, w_hh, bias] = lstm_param_names(prefix);
        let w_ih = graph.param(store, &w_ih)?;
        let w_hh = graph.param(store, &w_hh)?;
        let bias = graph.param(store, &bias)?;
        let hidden = graph.value(bias).len() / GATES;
        Ok(Self {
            w_ih,
            w_hh,
            bias,
            hidden,
        })
    }

    /// One cell update: returns (h, c).
    pub fn step<S: Scalar>(
        &self,
        g: &mut Graph<S>,
        x: NodeId,
        h_prev: NodeId,
        c_prev: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        let h = self.hidden;
        let from_x = g.dense(x, self.w_ih, self.bias, Activation::None)?;
        let from_h = g.matvec(self.w_hh, h_prev)?;
        let pre = g.add(from_x, from_h)?;

        let i_pre = g.slice(pre, 0, h)?;
        let f_pre = g.slice(pre, h, h)?;
        let g_pre = g.slice(pre, 2 * h, h)?;
        let o_pre = g.slice(pre, 3 * h, h)?;

        let i = g.sigmoid(i_pre);
        let f = g.sigmoid(f_pre);
        let cand = g.tanh(g_pre);
        let o = g.sigmoid(o_pre);

        let keep = g.mul(f, c_prev)?;
        let write = g.mul(i, cand)?;
        let c = g.add(keep, write)?;
        let c_act = g.tanh(c);
        let h_out = g.mul(o, c_act)?;
        Ok((h_out, c))
    }

    /// Run over a sequence from zero state; one hidden state per input.
    pub fn run<S: Scalar>(&self, g: &mut Graph<S>, inputs: &[NodeId]) -> Result<Vec<NodeId>> {
        if inputs.is_empty() {
            return Err(CoreError::EmptyInput("lstm over empty sequence".into()));
        }
        let mut h = g.zeros(self.hidden);
        let mut c = g.zeros(self.hidden);
        let mut states = Vec::with_capacity(inputs.len());
        for &x in inputs {
            let (h2, c2) = self.step(g, x, h, c)?;
            h = h2;
            c = c2;
            states.push(h);
        }
        Ok(states)
    }
}

/// Bidirectional pair of cells sharing a name prefix (`.fwd` / `.bwd`).
#[derive(Debug, Clone, Copy)]
pub struct BiLstm {
    pub fwd: LstmCell,
    pub bwd: LstmCell,
}

pub fn register_bilstm<S: Scalar, R: Rng>(
    store: &mut ParameterStore<S>,
    prefix: &str,
    input_dim: usize,
    hidden: usize,
    rng: &mut R,
) -> Result<()> {
    register_lstm(store, &format!("{prefix}.fwd"), input_dim, hidden, rng)?;
    register_lstm(store, &format!("{prefix}.bwd"), input_dim, hidden, rng)?;
    Ok(())
}

impl BiLstm {
    pub fn from_store<S: Scalar>(
        graph: &mut Graph<S>,
        store: &ParameterStore<S>,
        prefix: &str,
    ) -> Result<Self> {
        Ok(Self {
            fwd: LstmCell::from_store(graph, store, &format!("{prefix}.fwd"))?,
            bwd: LstmCell::from_store(graph, store, &format!("{prefix}.bwd"))?,
        })
    }

    /// Per-position concat of forward and backward states; output dim 2·h.
    pub fn run<S: Scalar>(&self, g: &mut Graph<S>, inputs: &[NodeId]) -> Result<Vec<NodeId>> {
        let fwd_states = self.fwd.run(g, inputs)?;
        let rev_inputs: Vec<NodeId> = inputs.iter().rev().copied().collect();
        let mut bwd_states = self.bwd.run(g, &rev_inputs)?;
        bwd_states.reverse();
        fwd_states
            .into_iter()
            .zip(bwd_states)
            .map(|(f, b)| g.concat(vec![f, b]))
            .collect()
    }
}

/// Eager single step for a weights slice already in a store; used by the
/// cell-level contract tests.
pub fn lstm_step<S: Scalar>(
    store: &ParameterStore<S>,
    prefix: &str,
    x: &Tensor<S>,
    h_prev: &Tensor<S>,
    c_prev: &Tensor<S>,
) -> Result<(Tensor<S>, Tensor<S>)> {
    let mut g = Graph::new();
    let cell = LstmCell::from_store(&mut g, store, prefix)?;
    let xn = g.constant(x.clone());
    let hn = g.constant(h_prev.clone());
    let cn = g.constant(c_prev.clone());
    let (h, c) = cell.step(&mut g, xn, hn, cn)?;
    Ok((g.value(h).clone(), g.value(c).clone()))
}

/// Eager sequence run; bidirectional output dim is 2·h per position.
pub fn lstm_sequence<S: Scalar>(
    store: &ParameterStore<S>,
    prefix: &str,
    inputs: &[Tensor<S>],
    bidirectional: bool,
) -> Result<Vec<Tensor<S>>> {
    if inputs.is_empty() {
        return Err(CoreError::EmptyInput("lstm over empty sequence".into()));
    }
    let mut g = Graph::new();
    let nodes: Vec<NodeId> = inputs.iter().map(|t| g.constant(t.clone())).collect();
    let states = if bidirectional {
        let net = BiLstm::from_store(&mut g, store, prefix)?;
        net.run(&mut g, &nodes)?
    } else {
        let cell = LstmCell::from_store(&mut g, store, prefix)?;
        cell.run(&mut g, &nodes)?
    };
    Ok(states.into_iter().map(|n| g.value(n).clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn zero_weight_store(input_dim: usize, hidden: usize) -> ParameterStore<f64> {
        let mut s = ParameterStore::new();
        s.register("cell.w_ih", Tensor::zeros(vec![GATES * hidden, input_dim]))
            .unwrap();
        s.register("cell.w_hh", Tensor::zeros(vec![GATES * hidden, hidden]))
            .unwrap();
        s.register("cell.bias", Tensor::zeros(vec![GATES * hidden]))
            .unwrap();
        s
    }

    #[test]
    fn zero_weights_zero_inputs_give_zero_state() {
        let s = zero_weight_store(3, 2);
        let (h, c) = lstm_step(
            &s,
            "cell",
            &Tensor::zeros(vec![3]),
            &Tensor::zeros(vec![2]),
            &Tensor::zeros(vec![2]),
        )
        .unwrap();
        assert_eq!(h.data(), &[0.0, 0.0]);
        assert_eq!(c.data(), &[0.0, 0.0]);
    }

    #[test]
    fn saturated_forget_gate_preserves_cell() {
        let mut s = zero_weight_store(3, 2);
        // forget-gate bias (second gate block) to +100: f ≈ 1
        let bias = s.get_mut("cell.bias").unwrap();
        bias.data_mut()[2] = 100.0;
        bias.data_mut()[3] = 100.0;
        let c_prev = Tensor::vector(vec![0.7, -0.3]);
        let (_, c) = lstm_step(
            &s,
            "cell",
            &Tensor::zeros(vec![3]),
            &Tensor::zeros(vec![2]),
            &c_prev,
        )
        .unwrap();
        for (a, b) in c.data().iter().zip(c_prev.data()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    /// Independent gate-by-gate oracle for a random 2-dim cell.
    #[test]
    fn random_cell_matches_gate_equation_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (d_in, h) = (3usize, 2usize);
        let mut s = ParameterStore::<f64>::new();
        register_lstm(&mut s, "cell", d_in, h, &mut rng).unwrap();
        let x = Tensor::vector(vec![0.3, -0.8, 1.1]);
        let h_prev = Tensor::vector(vec![0.05, -0.4]);
        let c_prev = Tensor::vector(vec![0.2, 0.6]);
        let (h_got, c_got) = lstm_step(&s, "cell", &x, &h_prev, &c_prev).unwrap();

        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let w_ih = s.get("cell.w_ih").unwrap();
        let w_hh = s.get("cell.w_hh").unwrap();
        let bias = s.get("cell.bias").unwrap();
        for k in 0..h {
            let pre = |gate: usize| -> f64 {
                let row = gate * h + k;
                let mut acc = bias.data()[row];
                for j in 0..d_in {
                    acc += w_ih.data()[row * d_in + j] * x.data()[j];
                }
                for j in 0..h {
                    acc += w_hh.data()[row * h + j] * h_prev.data()[j];
                }
                acc
            };
            let i = sig(pre(0));
            let f = sig(pre(1));
            let g = pre(2).tanh();
            let o = sig(pre(3));
            let c = f * c_prev.data()[k] + i * g;
            let hh = o * c.tanh();
            assert!((c - c_got.data()[k]).abs() < 1e-6);
            assert!((hh - h_got.data()[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn sequence_contracts() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut s = ParameterStore::<f64>::new();
        register_lstm(&mut s, "uni", 2, 3, &mut rng).unwrap();
        register_bilstm(&mut s, "bi", 2, 3, &mut rng).unwrap();

        // empty input is an explicit error
        assert!(lstm_sequence(&s, "uni", &[], false).is_err());

        // length-1 sequence equals one step from zero state
        let x = Tensor::vector(vec![0.4, -0.2]);
        let seq = lstm_sequence(&s, "uni", &[x.clone()], false).unwrap();
        let (h1, _) = lstm_step(
            &s,
            "uni",
            &x,
            &Tensor::zeros(vec![3]),
            &Tensor::zeros(vec![3]),
        )
        .unwrap();
        assert_eq!(seq[0], h1);

        // bidirectional output dim is 2·h at every position
        let xs = vec![
            Tensor::vector(vec![1.0, 0.0]),
            Tensor::vector(vec![0.0, 1.0]),
            Tensor::vector(vec![1.0, 1.0]),
        ];
        let out = lstm_sequence(&s, "bi", &xs, true).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|t| t.len() == 6));

        // order sensitivity: reversed input != reversed output of forward run
        let fwd = lstm_sequence(&s, "uni", &xs, false).unwrap();
        let rev_in: Vec<_> = xs.iter().rev().cloned().collect();
        let rev_run = lstm_sequence(&s, "uni", &rev_in, false).unwrap();
        let mut rev_of_fwd = fwd.clone();
        rev_of_fwd.reverse();
        assert_ne!(rev_run, rev_of_fwd);
    }
}
