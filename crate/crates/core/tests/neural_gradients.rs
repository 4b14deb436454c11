//! Analytic gradients of the neural building blocks against central finite
//! differences.

use lyromel_core::neural::gradcheck::{finite_difference, max_relative_error};
use lyromel_core::neural::{Activation, Dense, LstmCell, LstmState, ParamSet, TensorRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;
const FLOOR: f64 = 1e-6;

/// LSTM followed by a per-step dense head.
#[derive(Clone)]
struct Stack {
    lstm: LstmCell,
    head: Dense,
}

impl ParamSet for Stack {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.lstm.collect(&format!("{prefix}lstm."), out);
        self.head.collect(&format!("{prefix}head."), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.lstm.collect_mut(out);
        self.head.collect_mut(out);
    }
}

struct Case {
    stack: Stack,
    inputs: Vec<Vec<f64>>,
    init: LstmState,
    weights: Vec<Vec<f64>>,
}

impl Case {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let hidden = rng.gen_range(1..=8);
        let input = rng.gen_range(1..=6);
        let out = rng.gen_range(1..=3);
        let steps = rng.gen_range(1..=5);
        let act = [Activation::Tanh, Activation::Sigmoid, Activation::Linear][rng.gen_range(0..3)];
        let stack = Stack {
            lstm: LstmCell::random(input, hidden, 0.6, rng),
            head: Dense::random(hidden, out, act, 0.6, rng),
        };
        let mut vec = |n: usize| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let inputs = (0..steps).map(|_| vec(input)).collect();
        let init = LstmState {
            h: vec(hidden),
            c: vec(hidden),
        };
        let weights = (0..steps).map(|_| vec(out)).collect();
        Self {
            stack,
            inputs,
            init,
            weights,
        }
    }

    fn loss(&self, s: &Stack) -> f64 {
        let states = s.lstm.forward_sequence(&self.inputs, &self.init).unwrap();
        states
            .iter()
            .zip(&self.weights)
            .map(|(st, w)| {
                let y = s.head.forward(&st.h).unwrap();
                y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum()
    }

    fn analytic(&self) -> Vec<f64> {
        let s = &self.stack;
        let (states, trace) = s.lstm.forward_sequence_traced(&self.inputs, &self.init).unwrap();
        let mut head_grads = s.head.zeros_like();
        let mut d_h = Vec::new();
        for (st, w) in states.iter().zip(&self.weights) {
            let (_, t) = s.head.forward_traced(&st.h).unwrap();
            d_h.push(s.head.backward_into(&t, w, &mut head_grads).unwrap());
        }
        let seq = s.lstm.backward_sequence(&trace, &d_h).unwrap();
        Stack {
            lstm: seq.params,
            head: head_grads,
        }
        .flatten()
    }
}

#[test]
fn lstm_dense_stack_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case_index in 0..20 {
        let case = Case::random(&mut rng);
        let analytic = case.analytic();
        let numeric = finite_difference(&case.stack, EPS, |s| case.loss(s));
        let err = max_relative_error(&analytic, &numeric, FLOOR);
        assert!(err < TOLERANCE, "case {case_index}: max relative error {err:e}");
    }
}

#[test]
fn zero_loss_gradient_gives_zero_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cell = LstmCell::random(3, 4, 0.5, &mut rng);
    let inputs = vec![vec![0.3, -0.1, 0.8]; 4];
    let (_, trace) = cell.forward_sequence_traced(&inputs, &LstmState::zeros(4)).unwrap();
    let grads = cell.backward_sequence(&trace, &vec![vec![0.0; 4]; 4]).unwrap();
    assert!(grads.params.flatten().iter().all(|&g| g == 0.0));
    assert!(grads.d_inputs.iter().flatten().all(|&g| g == 0.0));
}

#[test]
fn input_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let case = Case::random(&mut rng);
    let s = &case.stack;
    let (states, trace) = s.lstm.forward_sequence_traced(&case.inputs, &case.init).unwrap();
    let mut scratch = s.head.zeros_like();
    let d_h: Vec<Vec<f64>> = states
        .iter()
        .zip(&case.weights)
        .map(|(st, w)| {
            let (_, t) = s.head.forward_traced(&st.h).unwrap();
            s.head.backward_into(&t, w, &mut scratch).unwrap()
        })
        .collect();
    let seq = s.lstm.backward_sequence(&trace, &d_h).unwrap();
    for t in 0..case.inputs.len() {
        for k in 0..case.inputs[t].len() {
            let shifted = |delta: f64| {
                let mut c = Case {
                    stack: case.stack.clone(),
                    inputs: case.inputs.clone(),
                    init: case.init.clone(),
                    weights: case.weights.clone(),
                };
                c.inputs[t][k] += delta;
                c.loss(&c.stack)
            };
            let numeric = (shifted(EPS) - shifted(-EPS)) / (2.0 * EPS);
            let analytic = seq.d_inputs[t][k];
            let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(FLOOR);
            assert!(rel < TOLERANCE, "step {t} input {k}: {analytic} vs {numeric}");
        }
    }
}
