//! Central finite-difference verification of the tape's analytic gradients.
//! Runs in f64; the loss closure must be deterministic.

use crate::error::{CoreError, Result};
use crate::nn::store::ParameterStore;
use crate::nn::tensor::Tensor;

/// Report of the worst-offending parameter component.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// `loss_fn` must compute the loss and, when `accumulate` is true, leave
/// its gradients in the store's buffers. Every parameter component is
/// perturbed by ±epsilon; relative error is |a−f| / max(|a|,|f|,1e-8).
pub fn gradient_check<F>(
    mut loss_fn: F,
    store: &mut ParameterStore<f64>,
    epsilon: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&mut ParameterStore<f64>, bool) -> Result<f64>,
{
    store.zero_grads();
    let loss_a = loss_fn(store, true)?;
    let analytic: Vec<(String, Tensor<f64>)> = store
        .iter()
        .map(|e| (e.name.clone(), e.grad.clone()))
        .collect();
    store.zero_grads();

    let loss_b = loss_fn(store, false)?;
    if loss_a.to_bits() != loss_b.to_bits() {
        return Err(CoreError::NonDeterministicClosure {
            first: loss_a,
            second: loss_b,
        });
    }

    let names: Vec<String> = store.iter().map(|e| e.name.clone()).collect();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
    };

    for (pi, name) in names.iter().enumerate() {
        let n = store.iter().nth(pi).expect("index in range").value.len();
        for k in 0..n {
            let original = {
                let t = store.get_mut(name).expect("known name");
                let v = t.data()[k];
                t.data_mut()[k] = v + epsilon;
                v
            };
            let plus = loss_fn(store, false)?;
            store.get_mut(name).expect("known name").data_mut()[k] = original - epsilon;
            let minus = loss_fn(store, false)?;
            store.get_mut(name).expect("known name").data_mut()[k] = original;

            let fd = (plus - minus) / (2.0 * epsilon);
            let a = analytic[pi].1.data()[k];
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-8);
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = name.clone();
                report.worst_index = k;
                report.analytic = a;
                report.numeric = fd;
            }
        }
    }
    Ok(report)
}
