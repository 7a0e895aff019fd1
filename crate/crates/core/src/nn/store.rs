//! Named parameter storage with gradient accumulators and Adam state.

use crate::error::{CoreError, Result};
use crate::nn::scalar::Scalar;
use crate::nn::tensor::Tensor;

/// Adam hyperparameters. The paper cites Adam without reporting any
/// training configuration, so these defaults are ours.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global-norm clip applied to all gradients jointly before the update.
    pub gradient_clip_norm: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            gradient_clip_norm: Some(10.0),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0
            && self.gradient_clip_norm.map_or(true, |c| c > 0.0);
        if ok {
            Ok(())
        } else {
            Err(CoreError::Validation(format!(
                "invalid optimizer config: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamEntry<S: Scalar> {
    pub name: String,
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
    adam_m: Tensor<S>,
    adam_v: Tensor<S>,
}

/// Map from stable parameter name to tensor + gradient + Adam moments.
/// Entries are kept sorted by name so iteration order, checkpoint layout,
/// and graph indices are deterministic.
#[derive(Debug, Clone, Default)]
pub struct ParameterStore<S: Scalar = f32> {
    entries: Vec<ParamEntry<S>>,
    step: u64,
}

impl<S: Scalar> ParameterStore<S> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
            step: 0,
        }
    }

    pub fn register(&mut self, name: &str, value: Tensor<S>) -> Result<()> {
        match self.entries.binary_search_by(|e| e.name.as_str().cmp(name)) {
            Ok(_) => Err(CoreError::Validation(format!(
                "duplicate parameter name '{name}'"
            ))),
            Err(pos) => {
                let shape = value.shape().to_vec();
                self.entries.insert(
                    pos,
                    ParamEntry {
                        name: name.to_string(),
                        grad: Tensor::zeros(shape.clone()),
                        adam_m: Tensor::zeros(shape.clone()),
                        adam_v: Tensor::zeros(shape),
                        value,
                    },
                );
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
    }

    pub fn entry(&self, index: usize) -> &ParamEntry<S> {
        &self.entries[index]
    }

    pub fn get(&self, name: &str) -> Option<&Tensor<S>> {
        self.index_of(name).map(|i| &self.entries[i].value)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor<S>> {
        self.index_of(name)
            .map(move |i| &mut self.entries[i].value)
    }

    pub fn grad(&self, name: &str) -> Option<&Tensor<S>> {
        self.index_of(name).map(|i| &self.entries[i].grad)
    }

    /// Sorted-by-name iteration.
    pub fn iter(&self) -> impl Iterator<Item = &ParamEntry<S>> {
        self.entries.iter()
    }

    pub fn zero_grads(&mut self) {
        for e in &mut self.entries {
            e.grad.fill(S::ZERO);
        }
    }

    pub fn accumulate_grad(&mut self, index: usize, grad: &Tensor<S>) {
        self.entries[index].grad.add_assign(grad);
    }

    pub fn total_elements(&self) -> usize {
        self.entries.iter().map(|e| e.value.len()).sum()
    }

    pub fn to_f64(&self) -> ParameterStore<f64> {
        ParameterStore {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    value: e.value.to_f64(),
                    grad: e.grad.to_f64(),
                    adam_m: e.adam_m.to_f64(),
                    adam_v: e.adam_v.to_f64(),
                })
                .collect(),
            step: self.step,
        }
    }

    pub fn to_f32(&self) -> ParameterStore<f32> {
        ParameterStore {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    value: e.value.to_f32(),
                    grad: e.grad.to_f32(),
                    adam_m: e.adam_m.to_f32(),
                    adam_v: e.adam_v.to_f32(),
                })
                .collect(),
            step: self.step,
        }
    }

    /// Bias-corrected Adam update over every parameter, with optional
    /// global-norm clipping first. Gradient buffers are zeroed afterwards.
    pub fn adam_step(&mut self, config: &OptimizerConfig) -> Result<()> {
        config.validate()?;
        for e in &self.entries {
            if !e.grad.is_finite() {
                return Err(CoreError::NonFiniteGradient(e.name.clone()));
            }
        }

        let mut scale = 1.0f64;
        if let Some(max_norm) = config.gradient_clip_norm {
            let sq_sum: f64 = self
                .entries
                .iter()
                .flat_map(|e| e.grad.data().iter())
                .map(|g| g.to_f64() * g.to_f64())
                .sum();
            let norm = sq_sum.sqrt();
            if norm > max_norm {
                scale = max_norm / norm;
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let b1 = S::from_f64(config.beta1);
        let b2 = S::from_f64(config.beta2);
        let lr = S::from_f64(config.learning_rate);
        let eps = S::from_f64(config.epsilon);
        let clip = S::from_f64(scale);
        let m_corr = S::ONE / (S::ONE - b1.powi(t));
        let v_corr = S::ONE / (S::ONE - b2.powi(t));

        for e in &mut self.entries {
            let value = e.value.data_mut();
            let grad = e.grad.data_mut();
            let m = e.adam_m.data_mut();
            let v = e.adam_v.data_mut();
            for i in 0..value.len() {
                let g = grad[i] * clip;
                m[i] = b1 * m[i] + (S::ONE - b1) * g;
                v[i] = b2 * v[i] + (S::ONE - b2) * g * g;
                let m_hat = m[i] * m_corr;
                let v_hat = v[i] * v_corr;
                value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                grad[i] = S::ZERO;
            }
        }
        Ok(())
    }
}
