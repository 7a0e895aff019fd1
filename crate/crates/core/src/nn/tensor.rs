//! Flat row-major tensor. Small and unoptimized; everything the reader
//! needs is vectors, matrices, and a handful of elementwise ops.

use crate::error::{CoreError, Result};
use crate::nn::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S: Scalar = f32> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, data: Vec<S>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(CoreError::ShapeMismatch {
                left: format!("{shape:?}"),
                right: format!("data len {}", data.len()),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            data: vec![S::ZERO; n],
        }
    }

    pub fn vector(data: Vec<S>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn scalar(value: S) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn from_f32_slice(shape: Vec<usize>, data: &[f32]) -> Result<Self> {
        Self::new(shape, data.iter().map(|&x| S::from_f32(x)).collect())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Single element of a shape-[1] tensor.
    pub fn item(&self) -> S {
        debug_assert_eq!(self.data.len(), 1, "item() on non-scalar tensor");
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, value: S) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn add_assign(&mut self, other: &Tensor<S>) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    pub fn add_scaled(&mut self, other: &Tensor<S>, factor: S) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * factor;
        }
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = i;
            }
        }
        best
    }

    pub fn to_f64(&self) -> Tensor<f64> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x.to_f64()).collect(),
        }
    }

    pub fn to_f32(&self) -> Tensor<f32> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|x| x.to_f32()).collect(),
        }
    }
}

/// y = W·x for W:[m,n], x:[n].
pub fn matvec<S: Scalar>(w: &Tensor<S>, x: &Tensor<S>) -> Result<Tensor<S>> {
    let (m, n) = match w.shape() {
        [m, n] => (*m, *n),
        _ => return Err(CoreError::shape_mismatch(w.shape(), x.shape())),
    };
    if x.shape() != [n] {
        return Err(CoreError::shape_mismatch(w.shape(), x.shape()));
    }
    let mut out = vec![S::ZERO; m];
    let wd = w.data();
    let xd = x.data();
    for i in 0..m {
        let row = &wd[i * n..(i + 1) * n];
        let mut acc = S::ZERO;
        for (a, b) in row.iter().zip(xd) {
            acc += *a * *b;
        }
        out[i] = acc;
    }
    Tensor::new(vec![m], out)
}

/// y = Wᵀ·g, the adjoint of `matvec` with respect to x.
pub fn matvec_transpose<S: Scalar>(w: &Tensor<S>, g: &Tensor<S>) -> Tensor<S> {
    let (m, n) = (w.shape()[0], w.shape()[1]);
    debug_assert_eq!(g.len(), m);
    let mut out = vec![S::ZERO; n];
    let wd = w.data();
    let gd = g.data();
    for i in 0..m {
        let gi = gd[i];
        let row = &wd[i * n..(i + 1) * n];
        for (o, wij) in out.iter_mut().zip(row) {
            *o += *wij * gi;
        }
    }
    Tensor {
        shape: vec![n],
        data: out,
    }
}

pub fn dot<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| *x * *y)
        .sum()
}
