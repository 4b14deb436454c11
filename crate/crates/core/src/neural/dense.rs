use rand::Rng;

use super::activation::Activation;
use super::matrix::Matrix;
use super::params::{ParamSet, TensorRef};
use crate::error::{shape, Error, Result};

/// Fully-connected layer: `activation(W x + b)`, with `W` shaped `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Values recorded by [`Dense::forward_traced`] for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct DenseTrace {
    input: Vec<f64>,
    pre: Vec<f64>,
    output: Vec<f64>,
}

impl DenseTrace {
    pub fn is_recorded(&self) -> bool {
        !self.output.is_empty()
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

impl Dense {
    pub fn new(weight: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(shape(format!(
                "bias of length {} for a layer with {} outputs",
                bias.len(),
                weight.rows()
            )));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        Self {
            weight: Matrix::zeros(output, input),
            bias: vec![0.0; output],
            activation,
        }
    }

    /// Weights and biases drawn uniformly from `[-limit, limit]`.
    pub fn random<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        limit: f64,
        rng: &mut R,
    ) -> Self {
        let weight = Matrix::random_uniform(output, input, limit, rng);
        let bias = (0..output).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self {
            weight,
            bias,
            activation,
        }
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.weight.rows()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(shape(format!(
                "dense layer expects {} inputs, got {}",
                self.input_size(),
                x.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.output_size()];
        self.weight.affine_into(x, &self.bias, &mut out);
        for v in &mut out {
            *v = self.activation.apply(*v);
        }
        Ok(out)
    }

    pub fn forward_traced(&self, x: &[f64]) -> Result<(Vec<f64>, DenseTrace)> {
        self.check_input(x)?;
        let mut pre = vec![0.0; self.output_size()];
        self.weight.affine_into(x, &self.bias, &mut pre);
        let output: Vec<f64> = pre.iter().map(|&z| self.activation.apply(z)).collect();
        let trace = DenseTrace {
            input: x.to_vec(),
            pre,
            output: output.clone(),
        };
        Ok((output, trace))
    }

    /// Adds `∂loss/∂θ` into `grads` and returns `∂loss/∂x`.
    pub fn backward_into(&self, trace: &DenseTrace, d_output: &[f64], grads: &mut Dense) -> Result<Vec<f64>> {
        if !trace.is_recorded() {
            return Err(Error::State("dense backward without a recorded forward pass".into()));
        }
        if d_output.len() != self.output_size() || trace.input.len() != self.input_size() {
            return Err(shape("dense backward: gradient or trace does not match layer"));
        }
        let d_pre: Vec<f64> = d_output
            .iter()
            .zip(trace.pre.iter().zip(&trace.output))
            .map(|(d, (&z, &y))| d * self.activation.derivative(z, y))
            .collect();
        grads.weight.add_outer(&d_pre, &trace.input);
        for (gb, d) in grads.bias.iter_mut().zip(&d_pre) {
            *gb += d;
        }
        let mut dx = vec![0.0; self.input_size()];
        self.weight.transpose_mul_add(&d_pre, &mut dx);
        Ok(dx)
    }

    /// Gradient set and input gradient for a single recorded forward pass.
    pub fn backward(&self, trace: &DenseTrace, d_output: &[f64]) -> Result<(Dense, Vec<f64>)> {
        let mut grads = self.zeros_like();
        let dx = self.backward_into(trace, d_output, &mut grads)?;
        Ok((grads, dx))
    }
}

impl ParamSet for Dense {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        out.push(TensorRef::matrix(format!("{prefix}weight"), &self.weight));
        out.push(TensorRef::vector(format!("{prefix}bias"), &self.bias));
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        out.push(self.weight.as_mut_slice());
        out.push(&mut self.bias);
    }
}
