//! Uniform access to the named tensors of a parameter container.
//!
//! Gradient sets reuse the parameter types themselves: a gradient for a
//! [`Dense`](super::Dense) layer is another `Dense` of identical shape. The
//! helpers here (zeroing, accumulation, SGD, finite differences, checkpoints)
//! only rely on the flat tensor views exposed by [`ParamSet`].

use super::matrix::Matrix;
use crate::error::{invalid, shape, Result};

/// Borrowed view of one named parameter tensor.
#[derive(Debug, Clone)]
pub struct TensorRef<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: &'a [f64],
}

impl<'a> TensorRef<'a> {
    pub fn matrix(name: String, m: &'a Matrix) -> Self {
        Self {
            name,
            shape: vec![m.rows(), m.cols()],
            values: m.as_slice(),
        }
    }

    pub fn vector(name: String, v: &'a [f64]) -> Self {
        Self {
            name,
            shape: vec![v.len()],
            values: v,
        }
    }
}

pub trait ParamSet: Clone {
    /// Appends every tensor, names prefixed with `prefix`, in a fixed order.
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>);

    /// Mutable views in the same order as [`ParamSet::collect`].
    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>);

    fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        self.collect_mut(&mut out);
        out
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.values.len()).sum()
    }

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    /// `self += other`, element-wise.
    fn add_assign(&mut self, other: &Self) -> Result<()> {
        let theirs = other.tensors();
        let mine = self.tensors_mut();
        check_layout(mine.iter().map(|t| t.len()), theirs.iter().map(|t| t.values.len()))?;
        for (dst, src) in mine.into_iter().zip(theirs) {
            for (d, s) in dst.iter_mut().zip(src.values) {
                *d += s;
            }
        }
        Ok(())
    }

    fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// Copies every value into one flat vector, in tensor order.
    fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.values.iter().copied()).collect()
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.values.iter().all(|v| v.is_finite()))
    }
}

fn check_layout(a: impl Iterator<Item = usize>, b: impl Iterator<Item = usize>) -> Result<()> {
    let a: Vec<usize> = a.collect();
    let b: Vec<usize> = b.collect();
    if a != b {
        return Err(shape("parameter and gradient sets have different layouts"));
    }
    Ok(())
}

/// Plain gradient step `θ ← θ − lr · g`.
///
/// A zero rate leaves the parameters untouched; negative or non-finite rates
/// are rejected.
pub fn sgd_update<P: ParamSet>(params: &mut P, grads: &P, lr: f64) -> Result<()> {
    if !lr.is_finite() || lr < 0.0 {
        return Err(invalid(format!("learning rate must be finite and non-negative, got {lr}")));
    }
    let g = grads.tensors();
    let p = params.tensors_mut();
    check_layout(p.iter().map(|t| t.len()), g.iter().map(|t| t.values.len()))?;
    if lr == 0.0 {
        return Ok(());
    }
    for (dst, src) in p.into_iter().zip(g) {
        for (w, gw) in dst.iter_mut().zip(src.values) {
            *w -= lr * gw;
        }
    }
    Ok(())
}

/// Sums per-example gradients in slice order, so the result does not depend
/// on how the examples were scheduled.
pub fn sum_ordered<P: ParamSet>(template: &P, parts: &[P]) -> Result<P> {
    let mut acc = template.zeros_like();
    for p in parts {
        acc.add_assign(p)?;
    }
    Ok(acc)
}
