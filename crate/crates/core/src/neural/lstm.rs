//! LSTM cell with exact backpropagation through time.
//!
//! Gates read the concatenation `[h_{t-1}, x_t]`:
//!
//! ```text
//! i = σ(W_i [h, x] + b_i)      f = σ(W_f [h, x] + b_f)      o = σ(W_o [h, x] + b_o)
//! c̃ = tanh(W_c [h, x] + b_c)   c_t = f ∘ c_{t-1} + i ∘ c̃     h_t = o ∘ tanh(c_t)
//! ```

use rand::Rng;

use super::activation::sigmoid;
use super::matrix::Matrix;
use super::params::{ParamSet, TensorRef};
use crate::error::{invalid, shape, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCell {
    pub w_input: Matrix,
    pub w_forget: Matrix,
    pub w_output: Matrix,
    pub w_candidate: Matrix,
    pub b_input: Vec<f64>,
    pub b_forget: Vec<f64>,
    pub b_output: Vec<f64>,
    pub b_candidate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations of one step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmStepTrace {
    concat: Vec<f64>,
    input_gate: Vec<f64>,
    forget_gate: Vec<f64>,
    output_gate: Vec<f64>,
    candidate: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Recorded forward pass over a whole sequence.
#[derive(Debug, Clone, Default)]
pub struct LstmTrace {
    pub steps: Vec<LstmStepTrace>,
}

/// Gradients flowing out of one backward step.
#[derive(Debug, Clone)]
pub struct StepGradients {
    pub d_h_prev: Vec<f64>,
    pub d_c_prev: Vec<f64>,
    pub d_input: Vec<f64>,
}

/// Result of [`LstmCell::backward_sequence`].
#[derive(Debug, Clone)]
pub struct SequenceGradients {
    pub params: LstmCell,
    pub d_inputs: Vec<Vec<f64>>,
    pub d_initial: LstmState,
}

impl LstmCell {
    pub fn new(
        weights: [Matrix; 4],
        biases: [Vec<f64>; 4],
    ) -> Result<Self> {
        let [w_input, w_forget, w_output, w_candidate] = weights;
        let [b_input, b_forget, b_output, b_candidate] = biases;
        let cell = Self {
            w_input,
            w_forget,
            w_output,
            w_candidate,
            b_input,
            b_forget,
            b_output,
            b_candidate,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        let w = || Matrix::zeros(hidden, hidden + input);
        Self {
            w_input: w(),
            w_forget: w(),
            w_output: w(),
            w_candidate: w(),
            b_input: vec![0.0; hidden],
            b_forget: vec![0.0; hidden],
            b_output: vec![0.0; hidden],
            b_candidate: vec![0.0; hidden],
        }
    }

    pub fn random<R: Rng + ?Sized>(input: usize, hidden: usize, limit: f64, rng: &mut R) -> Self {
        let mut cell = Self::zeros(input, hidden);
        for t in cell.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.gen_range(-limit..=limit);
            }
        }
        cell
    }

    fn validate(&self) -> Result<()> {
        let (rows, cols) = (self.w_input.rows(), self.w_input.cols());
        if rows == 0 || cols <= rows {
            return Err(shape(format!("LSTM weights must be hidden x (hidden + input), got {rows}x{cols}")));
        }
        for w in [&self.w_forget, &self.w_output, &self.w_candidate] {
            if w.rows() != rows || w.cols() != cols {
                return Err(shape("LSTM gate weights differ in shape"));
            }
        }
        for b in [&self.b_input, &self.b_forget, &self.b_output, &self.b_candidate] {
            if b.len() != rows {
                return Err(shape("LSTM bias length differs from hidden size"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn hidden_size(&self) -> usize {
        self.w_input.rows()
    }

    #[inline]
    pub fn input_size(&self) -> usize {
        self.w_input.cols() - self.w_input.rows()
    }

    fn check_step(&self, x: &[f64], prev: &LstmState) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(shape(format!(
                "LSTM expects inputs of length {}, got {}",
                self.input_size(),
                x.len()
            )));
        }
        let hidden = self.hidden_size();
        if prev.h.len() != hidden || prev.c.len() != hidden {
            return Err(shape(format!("LSTM state must have hidden size {hidden}")));
        }
        Ok(())
    }

    pub fn step(&self, x: &[f64], prev: &LstmState) -> Result<LstmState> {
        self.step_traced(x, prev).map(|(s, _)| s)
    }

    pub fn step_traced(&self, x: &[f64], prev: &LstmState) -> Result<(LstmState, LstmStepTrace)> {
        self.check_step(x, prev)?;
        let hidden = self.hidden_size();
        let mut concat = Vec::with_capacity(hidden + x.len());
        concat.extend_from_slice(&prev.h);
        concat.extend_from_slice(x);

        let gate = |w: &Matrix, b: &[f64], f: fn(f64) -> f64| {
            let mut out = vec![0.0; hidden];
            w.affine_into(&concat, b, &mut out);
            out.iter_mut().for_each(|v| *v = f(*v));
            out
        };
        let input_gate = gate(&self.w_input, &self.b_input, sigmoid);
        let forget_gate = gate(&self.w_forget, &self.b_forget, sigmoid);
        let output_gate = gate(&self.w_output, &self.b_output, sigmoid);
        let candidate = gate(&self.w_candidate, &self.b_candidate, f64::tanh);

        let c: Vec<f64> = (0..hidden)
            .map(|k| forget_gate[k] * prev.c[k] + input_gate[k] * candidate[k])
            .collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = output_gate.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

        let trace = LstmStepTrace {
            concat,
            input_gate,
            forget_gate,
            output_gate,
            candidate,
            c_prev: prev.c.clone(),
            tanh_c,
        };
        Ok((LstmState { h, c }, trace))
    }

    /// Backward through one step. `d_h` and `d_c` are the total gradients
    /// reaching `h_t` and `c_t`; parameter gradients are added into `grads`.
    pub fn step_backward(
        &self,
        trace: &LstmStepTrace,
        d_h: &[f64],
        d_c: &[f64],
        grads: &mut LstmCell,
    ) -> StepGradients {
        let hidden = self.hidden_size();
        let mut da_i = vec![0.0; hidden];
        let mut da_f = vec![0.0; hidden];
        let mut da_o = vec![0.0; hidden];
        let mut da_g = vec![0.0; hidden];
        let mut d_c_prev = vec![0.0; hidden];
        for k in 0..hidden {
            let i = trace.input_gate[k];
            let f = trace.forget_gate[k];
            let o = trace.output_gate[k];
            let g = trace.candidate[k];
            let tc = trace.tanh_c[k];
            let dc = d_c[k] + d_h[k] * o * (1.0 - tc * tc);
            da_o[k] = d_h[k] * tc * o * (1.0 - o);
            da_i[k] = dc * g * i * (1.0 - i);
            da_f[k] = dc * trace.c_prev[k] * f * (1.0 - f);
            da_g[k] = dc * i * (1.0 - g * g);
            d_c_prev[k] = dc * f;
        }

        let mut d_concat = vec![0.0; trace.concat.len()];
        for (w, gw, gb, da) in [
            (&self.w_input, &mut grads.w_input, &mut grads.b_input, &da_i),
            (&self.w_forget, &mut grads.w_forget, &mut grads.b_forget, &da_f),
            (&self.w_output, &mut grads.w_output, &mut grads.b_output, &da_o),
            (&self.w_candidate, &mut grads.w_candidate, &mut grads.b_candidate, &da_g),
        ] {
            gw.add_outer(da, &trace.concat);
            gb.iter_mut().zip(da).for_each(|(b, d)| *b += d);
            w.transpose_mul_add(da, &mut d_concat);
        }
        let d_input = d_concat.split_off(hidden);
        StepGradients {
            d_h_prev: d_concat,
            d_c_prev,
            d_input,
        }
    }

    pub fn forward_sequence(&self, inputs: &[Vec<f64>], init: &LstmState) -> Result<Vec<LstmState>> {
        self.forward_sequence_traced(inputs, init).map(|(s, _)| s)
    }

    pub fn forward_sequence_traced(
        &self,
        inputs: &[Vec<f64>],
        init: &LstmState,
    ) -> Result<(Vec<LstmState>, LstmTrace)> {
        if inputs.is_empty() {
            return Err(invalid("LSTM sequence must contain at least one step"));
        }
        let mut states = Vec::with_capacity(inputs.len());
        let mut trace = LstmTrace::default();
        let mut prev = init.clone();
        for x in inputs {
            let (next, step) = self.step_traced(x, &prev)?;
            trace.steps.push(step);
            states.push(next.clone());
            prev = next;
        }
        Ok((states, trace))
    }

    /// Full backpropagation through time.
    ///
    /// `d_outputs[t]` is the loss gradient arriving at `h_t` from outside the
    /// recurrence (zero vectors for steps that do not feed the loss).
    pub fn backward_sequence(&self, trace: &LstmTrace, d_outputs: &[Vec<f64>]) -> Result<SequenceGradients> {
        if trace.steps.is_empty() {
            return Err(Error::State("LSTM backward without a recorded forward pass".into()));
        }
        if d_outputs.len() != trace.steps.len() {
            return Err(shape(format!(
                "{} output gradients for a {}-step trace",
                d_outputs.len(),
                trace.steps.len()
            )));
        }
        let hidden = self.hidden_size();
        if d_outputs.iter().any(|d| d.len() != hidden) {
            return Err(shape("output gradient length differs from hidden size"));
        }
        let mut grads = self.zeros_like();
        let mut d_inputs = vec![Vec::new(); trace.steps.len()];
        let mut d_h_next = vec![0.0; hidden];
        let mut d_c_next = vec![0.0; hidden];
        for t in (0..trace.steps.len()).rev() {
            let d_h: Vec<f64> = d_outputs[t].iter().zip(&d_h_next).map(|(a, b)| a + b).collect();
            let g = self.step_backward(&trace.steps[t], &d_h, &d_c_next, &mut grads);
            d_inputs[t] = g.d_input;
            d_h_next = g.d_h_prev;
            d_c_next = g.d_c_prev;
        }
        Ok(SequenceGradients {
            params: grads,
            d_inputs,
            d_initial: LstmState {
                h: d_h_next,
                c: d_c_next,
            },
        })
    }
}

impl ParamSet for LstmCell {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        out.push(TensorRef::matrix(format!("{prefix}w_input"), &self.w_input));
        out.push(TensorRef::matrix(format!("{prefix}w_forget"), &self.w_forget));
        out.push(TensorRef::matrix(format!("{prefix}w_output"), &self.w_output));
        out.push(TensorRef::matrix(format!("{prefix}w_candidate"), &self.w_candidate));
        out.push(TensorRef::vector(format!("{prefix}b_input"), &self.b_input));
        out.push(TensorRef::vector(format!("{prefix}b_forget"), &self.b_forget));
        out.push(TensorRef::vector(format!("{prefix}b_output"), &self.b_output));
        out.push(TensorRef::vector(format!("{prefix}b_candidate"), &self.b_candidate));
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        out.push(self.w_input.as_mut_slice());
        out.push(self.w_forget.as_mut_slice());
        out.push(self.w_output.as_mut_slice());
        out.push(self.w_candidate.as_mut_slice());
        out.push(&mut self.b_input);
        out.push(&mut self.b_forget);
        out.push(&mut self.b_output);
        out.push(&mut self.b_candidate);
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn zero_cell_gives_zero_state() {
        let cell = LstmCell::zeros(3, 4);
        let s = cell.step(&[0.7, -2.0, 5.0], &LstmState::zeros(4)).unwrap();
        assert_eq!(s, LstmState::zeros(4));
    }

    #[test]
    fn saturated_gates_keep_memory() {
        let mut cell = LstmCell::zeros(1, 1);
        cell.b_input = vec![100.0];
        cell.b_forget = vec![100.0];
        cell.b_output = vec![100.0];
        let prev = LstmState {
            h: vec![0.0],
            c: vec![0.7],
        };
        let s = cell.step(&[0.3], &prev).unwrap();
        // i = f = o ≈ 1, candidate = tanh(0) = 0.
        assert!((s.c[0] - 0.7).abs() < 1e-12);
        assert!((s.h[0] - 0.7f64.tanh()).abs() < 1e-12);
        assert!((s.h[0] - 0.604).abs() < 1e-3);
    }

    #[test]
    fn deterministic_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cell = LstmCell::random(2, 5, 0.5, &mut rng);
        let prev = LstmState::zeros(5);
        let a = cell.step(&[0.1, 0.9], &prev).unwrap();
        let b = cell.step(&[0.1, 0.9], &prev).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shape_errors() {
        let cell = LstmCell::zeros(2, 3);
        assert!(matches!(cell.step(&[1.0], &LstmState::zeros(3)), Err(Error::Shape(_))));
        assert!(matches!(cell.step(&[1.0, 2.0], &LstmState::zeros(2)), Err(Error::Shape(_))));
        let bad = LstmCell::new(
            [Matrix::zeros(2, 4), Matrix::zeros(2, 4), Matrix::zeros(2, 5), Matrix::zeros(2, 4)],
            [vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn empty_sequence_rejected() {
        let cell = LstmCell::zeros(2, 3);
        assert!(matches!(
            cell.forward_sequence(&[], &LstmState::zeros(3)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn sequence_of_one_equals_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cell = LstmCell::random(3, 4, 0.3, &mut rng);
        let x = vec![0.2, -0.4, 0.9];
        let init = LstmState::zeros(4);
        let seq = cell.forward_sequence(std::slice::from_ref(&x), &init).unwrap();
        assert_eq!(seq, vec![cell.step(&x, &init).unwrap()]);
    }

    #[test]
    fn zero_params_zero_inputs_over_twenty_steps() {
        let cell = LstmCell::zeros(3, 2);
        let inputs = vec![vec![0.0; 3]; 20];
        let states = cell.forward_sequence(&inputs, &LstmState::zeros(2)).unwrap();
        assert_eq!(states.len(), 20);
        assert!(states.iter().all(|s| *s == LstmState::zeros(2)));
    }

    #[test]
    fn prefix_causality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cell = LstmCell::random(2, 3, 0.5, &mut rng);
        let inputs: Vec<Vec<f64>> = (0..3).map(|t| vec![t as f64 * 0.3, 1.0 - t as f64]).collect();
        let init = LstmState::zeros(3);
        let full = cell.forward_sequence(&inputs, &init).unwrap();
        let prefix = cell.forward_sequence(&inputs[..2], &init).unwrap();
        assert_eq!(&full[..2], &prefix[..]);
    }

    #[test]
    fn backward_requires_a_trace() {
        let cell = LstmCell::zeros(2, 3);
        let err = cell.backward_sequence(&LstmTrace::default(), &[]).unwrap_err();
        assert!(matches!(err, Error::State(_)));
    }
}
