//! Define-by-run computation tape. Every operation computes its value
//! immediately and records what it needs for the reverse pass; `backward`
//! walks the tape once in reverse and accumulates parameter gradients.

use crate::error::{CoreError, Result};
use crate::nn::scalar::Scalar;
use crate::nn::store::ParameterStore;
use crate::nn::tensor::{dot, matvec, matvec_transpose, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
}

#[derive(Debug)]
enum Op<S: Scalar> {
    /// Constant leaf; no gradient.
    Const,
    /// Parameter leaf; gradient flows back into the store slot.
    Param,
    /// y = W·x + b, optionally ReLU-clamped.
    Dense {
        x: NodeId,
        w: NodeId,
        b: NodeId,
        activation: Activation,
    },
    /// y = W·x (no bias).
    MatVec { w: NodeId, x: NodeId },
    Add { a: NodeId, b: NodeId },
    Mul { a: NodeId, b: NodeId },
    Sigmoid { x: NodeId },
    Tanh { x: NodeId },
    Relu { x: NodeId },
    /// Scalar dot product; output shape [1].
    Dot { a: NodeId, b: NodeId },
    Concat { parts: Vec<NodeId> },
    /// Gather shape-[1] nodes into one vector.
    Stack { items: Vec<NodeId> },
    Slice { x: NodeId, start: usize, len: usize },
    Softmax {
        logits: NodeId,
        mask: Option<Vec<bool>>,
    },
    /// −log softmax(logits)[gold]; backward is the fused p − onehot rule.
    SoftmaxCrossEntropy {
        logits: NodeId,
        gold: usize,
        mask: Option<Vec<bool>>,
        probs: Tensor<S>,
    },
    /// Σ_k weights[k]·vectors[k] with constant vectors.
    WeightedSumConst {
        weights: NodeId,
        vectors: Vec<Tensor<S>>,
    },
    /// Σ_k weights[k]·items[k] with differentiable items.
    WeightedSumVar {
        weights: NodeId,
        items: Vec<NodeId>,
    },
    /// Mean of shape-[1] nodes.
    Mean { items: Vec<NodeId> },
    /// Inverted dropout with a fixed keep mask.
    Dropout {
        x: NodeId,
        keep: Vec<bool>,
        scale: S,
    },
}

struct Node<S: Scalar> {
    op: Op<S>,
    value: Tensor<S>,
    grad: Option<Tensor<S>>,
}

pub struct Graph<S: Scalar = f32> {
    nodes: Vec<Node<S>>,
    /// store index -> node, so each parameter appears once.
    param_nodes: Vec<(usize, NodeId)>,
}

impl<S: Scalar> Default for Graph<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> Graph<S> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            param_nodes: Vec::new(),
        }
    }

    fn push(&mut self, op: Op<S>, value: Tensor<S>) -> NodeId {
        debug_assert!(value.is_finite(), "non-finite value out of {op:?}");
        self.nodes.push(Node {
            op,
            value,
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &Tensor<S> {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: NodeId) -> Option<&Tensor<S>> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn constant(&mut self, value: Tensor<S>) -> NodeId {
        self.push(Op::Const, value)
    }

    pub fn zeros(&mut self, len: usize) -> NodeId {
        self.constant(Tensor::zeros(vec![len]))
    }

    /// Import a parameter by name. The value is snapshotted; repeated
    /// imports of the same name return the same node.
    pub fn param(&mut self, store: &ParameterStore<S>, name: &str) -> Result<NodeId> {
        let index = store
            .index_of(name)
            .ok_or_else(|| CoreError::Validation(format!("unknown parameter '{name}'")))?;
        if let Some(&(_, id)) = self.param_nodes.iter().find(|(i, _)| *i == index) {
            return Ok(id);
        }
        let value = store.entry(index).value.clone();
        let id = self.push(Op::Param, value);
        self.param_nodes.push((index, id));
        Ok(id)
    }

    pub fn dense(
        &mut self,
        x: NodeId,
        w: NodeId,
        b: NodeId,
        activation: Activation,
    ) -> Result<NodeId> {
        let mut y = matvec(self.value(w), self.value(x))?;
        if y.shape() != self.value(b).shape() {
            return Err(CoreError::shape_mismatch(
                y.shape(),
                self.value(b).shape(),
            ));
        }
        y.add_assign(self.value(b));
        if activation == Activation::Relu {
            for v in y.data_mut() {
                *v = v.maximum(S::ZERO);
            }
        }
        Ok(self.push(Op::Dense { x, w, b, activation }, y))
    }

    pub fn matvec(&mut self, w: NodeId, x: NodeId) -> Result<NodeId> {
        let y = matvec(self.value(w), self.value(x))?;
        Ok(self.push(Op::MatVec { w, x }, y))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(CoreError::shape_mismatch(
                self.value(a).shape(),
                self.value(b).shape(),
            ));
        }
        let mut y = self.value(a).clone();
        y.add_assign(self.value(b));
        Ok(self.push(Op::Add { a, b }, y))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(CoreError::shape_mismatch(
                self.value(a).shape(),
                self.value(b).shape(),
            ));
        }
        let data = self
            .value(a)
            .data()
            .iter()
            .zip(self.value(b).data())
            .map(|(x, y)| *x * *y)
            .collect();
        let y = Tensor::new(self.value(a).shape().to_vec(), data)?;
        Ok(self.push(Op::Mul { a, b }, y))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|v| v.sigmoid()).collect();
        let y = Tensor::new(self.value(x).shape().to_vec(), data).unwrap();
        self.push(Op::Sigmoid { x }, y)
    }

    pub fn tanh(&mut self, x: NodeId) -> NodeId {
        let data = self.value(x).data().iter().map(|v| v.tanh()).collect();
        let y = Tensor::new(self.value(x).shape().to_vec(), data).unwrap();
        self.push(Op::Tanh { x }, y)
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let data = self
            .value(x)
            .data()
            .iter()
            .map(|v| v.maximum(S::ZERO))
            .collect();
        let y = Tensor::new(self.value(x).shape().to_vec(), data).unwrap();
        self.push(Op::Relu { x }, y)
    }

    pub fn dot(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(CoreError::shape_mismatch(
                self.value(a).shape(),
                self.value(b).shape(),
            ));
        }
        let v = dot(self.value(a), self.value(b));
        Ok(self.push(Op::Dot { a, b }, Tensor::scalar(v)))
    }

    pub fn concat(&mut self, parts: Vec<NodeId>) -> Result<NodeId> {
        if parts.is_empty() {
            return Err(CoreError::EmptyInput("concat of zero parts".into()));
        }
        let mut data = Vec::new();
        for p in &parts {
            data.extend_from_slice(self.value(*p).data());
        }
        let y = Tensor::vector(data);
        Ok(self.push(Op::Concat { parts }, y))
    }

    pub fn stack(&mut self, items: Vec<NodeId>) -> Result<NodeId> {
        if items.is_empty() {
            return Err(CoreError::EmptyInput("stack of zero items".into()));
        }
        let mut data = Vec::with_capacity(items.len());
        for it in &items {
            debug_assert_eq!(self.value(*it).len(), 1);
            data.push(self.value(*it).item());
        }
        let y = Tensor::vector(data);
        Ok(self.push(Op::Stack { items }, y))
    }

    pub fn slice(&mut self, x: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let src = self.value(x);
        if start + len > src.len() {
            return Err(CoreError::IndexOutOfRange {
                index: start + len,
                len: src.len(),
            });
        }
        let y = Tensor::vector(src.data()[start..start + len].to_vec());
        Ok(self.push(Op::Slice { x, start, len }, y))
    }

    pub fn softmax(&mut self, logits: NodeId, mask: Option<&[bool]>) -> Result<NodeId> {
        let y = softmax_value(self.value(logits), mask)?;
        Ok(self.push(
            Op::Softmax {
                logits,
                mask: mask.map(|m| m.to_vec()),
            },
            y,
        ))
    }

    /// Cross-entropy against `gold` computed from logits. Masked positions
    /// are excluded from the softmax support; a gold index at a masked
    /// position is an error.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: NodeId,
        gold: usize,
        mask: Option<&[bool]>,
    ) -> Result<NodeId> {
        let n = self.value(logits).len();
        if gold >= n {
            return Err(CoreError::IndexOutOfRange { index: gold, len: n });
        }
        if let Some(m) = mask {
            if !m[gold] {
                return Err(CoreError::Validation(format!(
                    "gold index {gold} points at a masked position"
                )));
            }
        }
        let probs = softmax_value(self.value(logits), mask)?;
        let p_gold = probs.data()[gold].to_f64().max(1e-12);
        let loss = S::from_f64(-p_gold.ln());
        Ok(self.push(
            Op::SoftmaxCrossEntropy {
                logits,
                gold,
                mask: mask.map(|m| m.to_vec()),
                probs,
            },
            Tensor::scalar(loss),
        ))
    }

    pub fn weighted_sum_const(
        &mut self,
        weights: NodeId,
        vectors: Vec<Tensor<S>>,
    ) -> Result<NodeId> {
        if vectors.is_empty() {
            return Err(CoreError::EmptyInput("weighted sum of zero vectors".into()));
        }
        if self.value(weights).len() != vectors.len() {
            return Err(CoreError::shape_mismatch(
                self.value(weights).shape(),
                &[vectors.len()],
            ));
        }
        let dim = vectors[0].len();
        let mut out = Tensor::zeros(vec![dim]);
        for (w, v) in self.value(weights).data().iter().zip(&vectors) {
            out.add_scaled(v, *w);
        }
        Ok(self.push(Op::WeightedSumConst { weights, vectors }, out))
    }

    pub fn weighted_sum_var(&mut self, weights: NodeId, items: Vec<NodeId>) -> Result<NodeId> {
        if items.is_empty() {
            return Err(CoreError::EmptyInput("weighted sum of zero items".into()));
        }
        if self.value(weights).len() != items.len() {
            return Err(CoreError::shape_mismatch(
                self.value(weights).shape(),
                &[items.len()],
            ));
        }
        let dim = self.value(items[0]).len();
        let mut out = Tensor::zeros(vec![dim]);
        for (k, it) in items.iter().enumerate() {
            let w = self.value(weights).data()[k];
            out.add_scaled(self.value(*it), w);
        }
        Ok(self.push(Op::WeightedSumVar { weights, items }, out))
    }

    pub fn mean(&mut self, items: Vec<NodeId>) -> Result<NodeId> {
        if items.is_empty() {
            return Err(CoreError::EmptyInput("mean of zero items".into()));
        }
        let sum: S = items.iter().map(|it| self.value(*it).item()).sum();
        let v = sum / S::from_f64(items.len() as f64);
        Ok(self.push(Op::Mean { items }, Tensor::scalar(v)))
    }

    pub fn dropout(&mut self, x: NodeId, keep: Vec<bool>, keep_prob: f64) -> Result<NodeId> {
        if keep.len() != self.value(x).len() {
            return Err(CoreError::shape_mismatch(
                self.value(x).shape(),
                &[keep.len()],
            ));
        }
        let scale = S::from_f64(1.0 / keep_prob);
        let data = self
            .value(x)
            .data()
            .iter()
            .zip(&keep)
            .map(|(v, k)| if *k { *v * scale } else { S::ZERO })
            .collect();
        let y = Tensor::new(self.value(x).shape().to_vec(), data)?;
        Ok(self.push(Op::Dropout { x, keep, scale }, y))
    }

    fn grad_mut(&mut self, id: NodeId) -> &mut Tensor<S> {
        let shape = self.nodes[id.0].value.shape().to_vec();
        self.nodes[id.0]
            .grad
            .get_or_insert_with(|| Tensor::zeros(shape))
    }

    fn add_grad(&mut self, id: NodeId, g: &Tensor<S>) {
        self.grad_mut(id).add_assign(g);
    }

    fn add_grad_scaled(&mut self, id: NodeId, g: &Tensor<S>, factor: S) {
        self.grad_mut(id).add_scaled(g, factor);
    }

    /// Reverse pass seeded with d(output)/d(output) = seed at `output`.
    pub fn backward(&mut self, output: NodeId, seed: S) {
        {
            let g = self.grad_mut(output);
            debug_assert_eq!(g.len(), 1, "backward from non-scalar output");
            g.data_mut()[0] += seed;
        }
        for i in (0..=output.0).rev() {
            let Some(out_grad) = self.nodes[i].grad.take() else {
                continue;
            };
            self.backprop_node(i, &out_grad);
            self.nodes[i].grad = Some(out_grad);
        }
    }

    fn backprop_node(&mut self, i: usize, g: &Tensor<S>) {
        // The op is moved out so we can mutate other nodes' grads freely.
        let op = std::mem::replace(&mut self.nodes[i].op, Op::Const);
        match &op {
            Op::Const | Op::Param => {}
            Op::Dense { x, w, b, activation } => {
                let mut gy = g.clone();
                if *activation == Activation::Relu {
                    for (gv, y) in gy.data_mut().iter_mut().zip(self.nodes[i].value.data()) {
                        if *y <= S::ZERO {
                            *gv = S::ZERO;
                        }
                    }
                }
                let (n_out, n_in) = {
                    let ws = self.value(*w).shape();
                    (ws[0], ws[1])
                };
                // dW += gy ⊗ x
                {
                    let x_val = self.value(*x).clone();
                    let gw = self.grad_mut(*w);
                    let gwd = gw.data_mut();
                    for r in 0..n_out {
                        let gr = gy.data()[r];
                        for c in 0..n_in {
                            gwd[r * n_in + c] += gr * x_val.data()[c];
                        }
                    }
                }
                let gx = matvec_transpose(self.value(*w), &gy);
                self.add_grad(*x, &gx);
                self.add_grad(*b, &gy);
            }
            Op::MatVec { w, x } => {
                let (n_out, n_in) = {
                    let ws = self.value(*w).shape();
                    (ws[0], ws[1])
                };
                {
                    let x_val = self.value(*x).clone();
                    let gw = self.grad_mut(*w);
                    let gwd = gw.data_mut();
                    for r in 0..n_out {
                        let gr = g.data()[r];
                        for c in 0..n_in {
                            gwd[r * n_in + c] += gr * x_val.data()[c];
                        }
                    }
                }
                let gx = matvec_transpose(self.value(*w), g);
                self.add_grad(*x, &gx);
            }
            Op::Add { a, b } => {
                self.add_grad(*a, g);
                self.add_grad(*b, g);
            }
            Op::Mul { a, b } => {
                let ga_data: Vec<S> = g
                    .data()
                    .iter()
                    .zip(self.value(*b).data())
                    .map(|(gv, bv)| *gv * *bv)
                    .collect();
                let gb_data: Vec<S> = g
                    .data()
                    .iter()
                    .zip(self.value(*a).data())
                    .map(|(gv, av)| *gv * *av)
                    .collect();
                self.add_grad(*a, &Tensor::vector(ga_data));
                self.add_grad(*b, &Tensor::vector(gb_data));
            }
            Op::Sigmoid { x } => {
                let gx: Vec<S> = g
                    .data()
                    .iter()
                    .zip(self.nodes[i].value.data())
                    .map(|(gv, y)| *gv * *y * (S::ONE - *y))
                    .collect();
                self.add_grad(*x, &Tensor::vector(gx));
            }
            Op::Tanh { x } => {
                let gx: Vec<S> = g
                    .data()
                    .iter()
                    .zip(self.nodes[i].value.data())
                    .map(|(gv, y)| *gv * (S::ONE - *y * *y))
                    .collect();
                self.add_grad(*x, &Tensor::vector(gx));
            }
            Op::Relu { x } => {
                let gx: Vec<S> = g
                    .data()
                    .iter()
                    .zip(self.nodes[i].value.data())
                    .map(|(gv, y)| if *y > S::ZERO { *gv } else { S::ZERO })
                    .collect();
                self.add_grad(*x, &Tensor::vector(gx));
            }
            Op::Dot { a, b } => {
                let s = g.item();
                let bv = self.value(*b).clone();
                let av = self.value(*a).clone();
                self.add_grad_scaled(*a, &bv, s);
                self.add_grad_scaled(*b, &av, s);
            }
            Op::Concat { parts } => {
                let mut offset = 0;
                for p in parts {
                    let len = self.value(*p).len();
                    let slice = Tensor::vector(g.data()[offset..offset + len].to_vec());
                    self.add_grad(*p, &slice);
                    offset += len;
                }
            }
            Op::Stack { items } => {
                for (k, it) in items.iter().enumerate() {
                    let gi = Tensor::scalar(g.data()[k]);
                    self.add_grad(*it, &gi);
                }
            }
            Op::Slice { x, start, len } => {
                let gx = self.grad_mut(*x);
                let gd = gx.data_mut();
                for k in 0..*len {
                    gd[start + k] += g.data()[k];
                }
            }
            Op::Softmax { logits, mask } => {
                // dL/dz_k = p_k (g_k − Σ_j g_j p_j), zero outside the mask.
                let p = self.nodes[i].value.clone();
                let inner: S = g
                    .data()
                    .iter()
                    .zip(p.data())
                    .map(|(gv, pv)| *gv * *pv)
                    .sum();
                let gz: Vec<S> = p
                    .data()
                    .iter()
                    .zip(g.data())
                    .enumerate()
                    .map(|(k, (pv, gv))| {
                        if mask.as_ref().map_or(true, |m| m[k]) {
                            *pv * (*gv - inner)
                        } else {
                            S::ZERO
                        }
                    })
                    .collect();
                self.add_grad(*logits, &Tensor::vector(gz));
            }
            Op::SoftmaxCrossEntropy {
                logits,
                gold,
                mask,
                probs,
            } => {
                let seed = g.item();
                let gz: Vec<S> = probs
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(k, pv)| {
                        if mask.as_ref().map_or(true, |m| m[k]) {
                            let delta = if k == *gold { S::ONE } else { S::ZERO };
                            seed * (*pv - delta)
                        } else {
                            S::ZERO
                        }
                    })
                    .collect();
                self.add_grad(*logits, &Tensor::vector(gz));
            }
            Op::WeightedSumConst { weights, vectors } => {
                let gw: Vec<S> = vectors.iter().map(|v| dot(g, v)).collect();
                self.add_grad(*weights, &Tensor::vector(gw));
            }
            Op::WeightedSumVar { weights, items } => {
                let w_val = self.value(*weights).clone();
                let mut gw = vec![S::ZERO; items.len()];
                for (k, it) in items.iter().enumerate() {
                    gw[k] = dot(g, self.value(*it));
                    self.add_grad_scaled(*it, g, w_val.data()[k]);
                }
                self.add_grad(*weights, &Tensor::vector(gw));
            }
            Op::Mean { items } => {
                let f = g.item() / S::from_f64(items.len() as f64);
                for it in items {
                    self.add_grad(*it, &Tensor::scalar(f));
                }
            }
            Op::Dropout { x, keep, scale } => {
                let gx: Vec<S> = g
                    .data()
                    .iter()
                    .zip(keep)
                    .map(|(gv, k)| if *k { *gv * *scale } else { S::ZERO })
                    .collect();
                self.add_grad(*x, &Tensor::vector(gx));
            }
        }
        self.nodes[i].op = op;
    }

    /// Copy accumulated parameter gradients into the store's buffers.
    pub fn accumulate_into(&self, store: &mut ParameterStore<S>) {
        for (store_index, id) in &self.param_nodes {
            if let Some(g) = &self.nodes[id.0].grad {
                store.accumulate_grad(*store_index, g);
            }
        }
    }
}

/// Numerically stable masked softmax (max subtraction). Masked positions
/// come out exactly zero; fully masked input is an error.
pub fn softmax_value<S: Scalar>(logits: &Tensor<S>, mask: Option<&[bool]>) -> Result<Tensor<S>> {
    let n = logits.len();
    if n == 0 {
        return Err(CoreError::EmptyInput("softmax over empty vector".into()));
    }
    if let Some(m) = mask {
        if m.len() != n {
            return Err(CoreError::shape_mismatch(logits.shape(), &[m.len()]));
        }
    }
    let live = |k: usize| mask.map_or(true, |m| m[k]);
    let mut max: Option<S> = None;
    for k in 0..n {
        if live(k) {
            let v = logits.data()[k];
            max = Some(match max {
                Some(m) => m.maximum(v),
                None => v,
            });
        }
    }
    let max = max.ok_or(CoreError::AllMasked)?;
    let mut out = vec![S::ZERO; n];
    let mut sum = S::ZERO;
    for k in 0..n {
        if live(k) {
            let e = (logits.data()[k] - max).exp();
            out[k] = e;
            sum += e;
        }
    }
    for v in out.iter_mut() {
        *v = *v / sum;
    }
    Tensor::new(vec![n], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_identity_and_relu() {
        let mut g = Graph::<f64>::new();
        let x = g.constant(Tensor::vector(vec![1.0, -1.0]));
        let w = g.constant(Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap());
        let b = g.constant(Tensor::vector(vec![0.0, 0.0]));
        let y = g.dense(x, w, b, Activation::None).unwrap();
        assert_eq!(g.value(y).data(), &[1.0, -1.0]);
        let y2 = g.dense(x, w, b, Activation::Relu).unwrap();
        assert_eq!(g.value(y2).data(), &[1.0, 0.0]);
    }

    #[test]
    fn dense_hand_arithmetic() {
        // 2·1 + 3·1 + 0.5 = 5.5
        let mut g = Graph::<f64>::new();
        let x = g.constant(Tensor::vector(vec![1.0, 1.0]));
        let w = g.constant(Tensor::new(vec![1, 2], vec![2.0, 3.0]).unwrap());
        let b = g.constant(Tensor::vector(vec![0.5]));
        let y = g.dense(x, w, b, Activation::None).unwrap();
        assert!((g.value(y).data()[0] - 5.5).abs() < 1e-12);
    }

    #[test]
    fn backward_through_dense_matches_hand_gradient() {
        // loss = dot(relu(Wx+b), u); pick everything positive so relu is identity.
        let mut store = ParameterStore::<f64>::new();
        store
            .register(
                "w",
                Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
            )
            .unwrap();
        store.register("b", Tensor::vector(vec![0.1, 0.2])).unwrap();

        let mut g = Graph::<f64>::new();
        let w = g.param(&store, "w").unwrap();
        let b = g.param(&store, "b").unwrap();
        let x = g.constant(Tensor::vector(vec![1.0, 0.5]));
        let u = g.constant(Tensor::vector(vec![1.0, 1.0]));
        let y = g.dense(x, w, b, Activation::Relu).unwrap();
        let loss = g.dot(y, u).unwrap();
        g.backward(loss, 1.0);
        g.accumulate_into(&mut store);

        // d loss / d w = u ⊗ x (relu active everywhere)
        assert_eq!(
            store.grad("w").unwrap().data(),
            &[1.0, 0.5, 1.0, 0.5]
        );
        assert_eq!(store.grad("b").unwrap().data(), &[1.0, 1.0]);
    }

    #[test]
    fn softmax_basics() {
        let s = softmax_value(&Tensor::vector(vec![0.0f64, 0.0]), None).unwrap();
        assert_eq!(s.data(), &[0.5, 0.5]);

        let s = softmax_value(&Tensor::vector(vec![1.0f64, 2.0, 3.0]), None).unwrap();
        let expected = [0.09003057, 0.24472847, 0.66524096];
        for (a, e) in s.data().iter().zip(expected) {
            assert!((a - e).abs() < 1e-5);
        }

        let s = softmax_value(&Tensor::vector(vec![5.0f64, 5.0]), Some(&[true, false])).unwrap();
        assert_eq!(s.data(), &[1.0, 0.0]);

        assert!(matches!(
            softmax_value(&Tensor::vector(vec![1.0f64]), Some(&[false])),
            Err(CoreError::AllMasked)
        ));
    }

    #[test]
    fn softmax_shift_invariance() {
        let logits = Tensor::vector(vec![0.3f64, -1.2, 4.0, 2.2]);
        let shifted = Tensor::vector(logits.data().iter().map(|x| x + 123.5).collect());
        let a = softmax_value(&logits, None).unwrap();
        let b = softmax_value(&shifted, None).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn cross_entropy_gold_mask_violation() {
        let mut g = Graph::<f64>::new();
        let z = g.constant(Tensor::vector(vec![0.0, 0.0]));
        let err = g.softmax_cross_entropy(z, 1, Some(&[true, false]));
        assert!(err.is_err());
    }

    #[test]
    fn fused_cross_entropy_backward_is_p_minus_onehot() {
        let mut store = ParameterStore::<f64>::new();
        store
            .register("z", Tensor::vector(vec![1.0, 2.0, 3.0]))
            .unwrap();
        let mut g = Graph::<f64>::new();
        let z = g.param(&store, "z").unwrap();
        let loss = g.softmax_cross_entropy(z, 2, None).unwrap();
        g.backward(loss, 1.0);
        g.accumulate_into(&mut store);
        let p = softmax_value(&Tensor::vector(vec![1.0f64, 2.0, 3.0]), None).unwrap();
        let gz = store.grad("z").unwrap();
        for k in 0..3 {
            let expect = p.data()[k] - if k == 2 { 1.0 } else { 0.0 };
            assert!((gz.data()[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_sums_forward_and_backward() {
        let mut store = ParameterStore::<f64>::new();
        store
            .register("w", Tensor::vector(vec![0.25, 0.75]))
            .unwrap();
        let mut g = Graph::<f64>::new();
        let w = g.param(&store, "w").unwrap();
        let vs = vec![
            Tensor::vector(vec![1.0, 0.0]),
            Tensor::vector(vec![0.0, 2.0]),
        ];
        let out = g.weighted_sum_const(w, vs).unwrap();
        assert_eq!(g.value(out).data(), &[0.25, 1.5]);
        let u = g.constant(Tensor::vector(vec![1.0, 1.0]));
        let loss = g.dot(out, u).unwrap();
        g.backward(loss, 1.0);
        g.accumulate_into(&mut store);
        // d/dw_k = dot(u, v_k)
        assert_eq!(store.grad("w").unwrap().data(), &[1.0, 2.0]);
    }
}
