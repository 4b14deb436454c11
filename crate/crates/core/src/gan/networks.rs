use rand::Rng;

use super::{ATTRIBUTE_DIM, DISCRIMINATOR_INPUT, GENERATOR_INPUT, NOISE_DIM};
use crate::embedding::{LyricsEmbedding, EMBEDDING_DIM};
use crate::error::{shape, Error, Result};
use crate::neural::{Activation, Dense, DenseTrace, LstmCell, LstmState, LstmStepTrace, LstmTrace, ParamSet, TensorRef};

fn check_lengths(steps: usize, embeds: usize, what: &str) -> Result<()> {
    if steps == 0 {
        return Err(shape(format!("{what} needs at least one step")));
    }
    if steps != embeds {
        return Err(shape(format!("{what}: {steps} steps but {embeds} lyric embeddings")));
    }
    Ok(())
}

fn add_into(acc: &mut [f64], other: &[f64]) {
    acc.iter_mut().zip(other).for_each(|(a, b)| *a += b);
}

/// Autoregressive melody generator: per step, noise, lyric embedding and the
/// previous output go through a ReLU layer, two stacked LSTMs and a linear
/// head producing one attribute triplet.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub fc_in: Dense,
    pub lstm1: LstmCell,
    pub lstm2: LstmCell,
    pub fc_out: Dense,
}

#[derive(Debug, Clone)]
struct GeneratorStep {
    fc_in: DenseTrace,
    lstm1: LstmStepTrace,
    lstm2: LstmStepTrace,
    fc_out: DenseTrace,
}

/// Activations recorded by [`Generator::forward_traced`].
#[derive(Debug, Clone, Default)]
pub struct GeneratorTrace {
    steps: Vec<GeneratorStep>,
}

impl Generator {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            fc_in: Dense::zeros(GENERATOR_INPUT, hidden, Activation::Relu),
            lstm1: LstmCell::zeros(hidden, hidden),
            lstm2: LstmCell::zeros(hidden, hidden),
            fc_out: Dense::zeros(hidden, ATTRIBUTE_DIM, Activation::Linear),
        }
    }

    pub fn random<R: Rng + ?Sized>(hidden: usize, limit: f64, rng: &mut R) -> Self {
        Self {
            fc_in: Dense::random(GENERATOR_INPUT, hidden, Activation::Relu, limit, rng),
            lstm1: LstmCell::random(hidden, hidden, limit, rng),
            lstm2: LstmCell::random(hidden, hidden, limit, rng),
            fc_out: Dense::random(hidden, ATTRIBUTE_DIM, Activation::Linear, limit, rng),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm1.hidden_size()
    }

    pub fn forward(&self, noise: &[Vec<f64>], embeds: &[LyricsEmbedding]) -> Result<Vec<[f64; 3]>> {
        self.forward_traced(noise, embeds).map(|(out, _)| out)
    }

    pub fn forward_traced(
        &self,
        noise: &[Vec<f64>],
        embeds: &[LyricsEmbedding],
    ) -> Result<(Vec<[f64; 3]>, GeneratorTrace)> {
        check_lengths(noise.len(), embeds.len(), "generator")?;
        if let Some(z) = noise.iter().find(|z| z.len() != NOISE_DIM) {
            return Err(shape(format!("noise vectors must have {NOISE_DIM} entries, got {}", z.len())));
        }
        let hidden = self.hidden_size();
        let mut s1 = LstmState::zeros(hidden);
        let mut s2 = LstmState::zeros(hidden);
        let mut prev = [0.0; ATTRIBUTE_DIM];
        let mut outputs = Vec::with_capacity(noise.len());
        let mut trace = GeneratorTrace::default();
        let mut input = Vec::with_capacity(GENERATOR_INPUT);
        for (z, y) in noise.iter().zip(embeds) {
            input.clear();
            input.extend_from_slice(z);
            input.extend_from_slice(y.as_slice());
            input.extend_from_slice(&prev);
            let (a, fc_in) = self.fc_in.forward_traced(&input)?;
            let (n1, lstm1) = self.lstm1.step_traced(&a, &s1)?;
            let (n2, lstm2) = self.lstm2.step_traced(&n1.h, &s2)?;
            let (out, fc_out) = self.fc_out.forward_traced(&n2.h)?;
            prev = [out[0], out[1], out[2]];
            outputs.push(prev);
            trace.steps.push(GeneratorStep {
                fc_in,
                lstm1,
                lstm2,
                fc_out,
            });
            s1 = n1;
            s2 = n2;
        }
        Ok((outputs, trace))
    }

    /// Parameter gradients given `∂loss/∂output_t` for every step, including
    /// the paths through the fed-back previous outputs.
    pub fn backward(&self, trace: &GeneratorTrace, d_outputs: &[[f64; 3]]) -> Result<Generator> {
        if trace.steps.is_empty() {
            return Err(Error::State("generator backward without a recorded forward pass".into()));
        }
        if d_outputs.len() != trace.steps.len() {
            return Err(shape(format!(
                "{} output gradients for a {}-step generator trace",
                d_outputs.len(),
                trace.steps.len()
            )));
        }
        let hidden = self.hidden_size();
        let mut grads = self.zeros_like();
        let mut dh1_next = vec![0.0; hidden];
        let mut dc1_next = vec![0.0; hidden];
        let mut dh2_next = vec![0.0; hidden];
        let mut dc2_next = vec![0.0; hidden];
        let mut d_fed_back = [0.0; ATTRIBUTE_DIM];
        for (step, d_out) in trace.steps.iter().zip(d_outputs).rev() {
            let d_y: Vec<f64> = (0..ATTRIBUTE_DIM).map(|k| d_out[k] + d_fed_back[k]).collect();
            let mut dh2 = self.fc_out.backward_into(&step.fc_out, &d_y, &mut grads.fc_out)?;
            add_into(&mut dh2, &dh2_next);
            let g2 = self.lstm2.step_backward(&step.lstm2, &dh2, &dc2_next, &mut grads.lstm2);
            let mut dh1 = g2.d_input;
            add_into(&mut dh1, &dh1_next);
            let g1 = self.lstm1.step_backward(&step.lstm1, &dh1, &dc1_next, &mut grads.lstm1);
            let dx = self.fc_in.backward_into(&step.fc_in, &g1.d_input, &mut grads.fc_in)?;
            d_fed_back.copy_from_slice(&dx[NOISE_DIM + EMBEDDING_DIM..]);
            dh2_next = g2.d_h_prev;
            dc2_next = g2.d_c_prev;
            dh1_next = g1.d_h_prev;
            dc1_next = g1.d_c_prev;
        }
        Ok(grads)
    }
}

impl ParamSet for Generator {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.fc_in.collect(&format!("{prefix}fc_in."), out);
        self.lstm1.collect(&format!("{prefix}lstm1."), out);
        self.lstm2.collect(&format!("{prefix}lstm2."), out);
        self.fc_out.collect(&format!("{prefix}fc_out."), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.fc_in.collect_mut(out);
        self.lstm1.collect_mut(out);
        self.lstm2.collect_mut(out);
        self.fc_out.collect_mut(out);
    }
}

/// Sequence classifier: two stacked LSTMs over `[triplet ∥ embedding]`, the
/// last hidden state mapped to a probability of being real.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub lstm1: LstmCell,
    pub lstm2: LstmCell,
    pub fc_out: Dense,
}

#[derive(Debug, Clone, Default)]
pub struct DiscriminatorTrace {
    lstm1: LstmTrace,
    lstm2: LstmTrace,
    fc_out: DenseTrace,
}

impl Discriminator {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            lstm1: LstmCell::zeros(DISCRIMINATOR_INPUT, hidden),
            lstm2: LstmCell::zeros(hidden, hidden),
            fc_out: Dense::zeros(hidden, 1, Activation::Sigmoid),
        }
    }

    pub fn random<R: Rng + ?Sized>(hidden: usize, limit: f64, rng: &mut R) -> Self {
        Self {
            lstm1: LstmCell::random(DISCRIMINATOR_INPUT, hidden, limit, rng),
            lstm2: LstmCell::random(hidden, hidden, limit, rng),
            fc_out: Dense::random(hidden, 1, Activation::Sigmoid, limit, rng),
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm1.hidden_size()
    }

    pub fn forward(&self, triplets: &[[f64; 3]], embeds: &[LyricsEmbedding]) -> Result<f64> {
        self.forward_traced(triplets, embeds).map(|(p, _)| p)
    }

    pub fn forward_traced(&self, triplets: &[[f64; 3]], embeds: &[LyricsEmbedding]) -> Result<(f64, DiscriminatorTrace)> {
        check_lengths(triplets.len(), embeds.len(), "discriminator")?;
        let inputs: Vec<Vec<f64>> = triplets
            .iter()
            .zip(embeds)
            .map(|(x, y)| x.iter().chain(y.as_slice()).copied().collect())
            .collect();
        let hidden = self.hidden_size();
        let (s1, lstm1) = self.lstm1.forward_sequence_traced(&inputs, &LstmState::zeros(hidden))?;
        let h1: Vec<Vec<f64>> = s1.into_iter().map(|s| s.h).collect();
        let (s2, lstm2) = self.lstm2.forward_sequence_traced(&h1, &LstmState::zeros(hidden))?;
        let last = &s2.last().expect("non-empty sequence").h;
        let (p, fc_out) = self.fc_out.forward_traced(last)?;
        Ok((p[0], DiscriminatorTrace { lstm1, lstm2, fc_out }))
    }

    /// Parameter gradients and `∂loss/∂triplet_t` given `∂loss/∂probability`.
    pub fn backward(&self, trace: &DiscriminatorTrace, d_score: f64) -> Result<(Discriminator, Vec<[f64; 3]>)> {
        if trace.lstm2.steps.is_empty() {
            return Err(Error::State("discriminator backward without a recorded forward pass".into()));
        }
        let hidden = self.hidden_size();
        let steps = trace.lstm2.steps.len();
        let mut grads = self.zeros_like();
        let d_last = self.fc_out.backward_into(&trace.fc_out, &[d_score], &mut grads.fc_out)?;
        let mut d_h2 = vec![vec![0.0; hidden]; steps];
        d_h2[steps - 1] = d_last;
        let g2 = self.lstm2.backward_sequence(&trace.lstm2, &d_h2)?;
        let g1 = self.lstm1.backward_sequence(&trace.lstm1, &g2.d_inputs)?;
        grads.lstm1 = g1.params;
        grads.lstm2 = g2.params;
        let d_triplets = g1.d_inputs.iter().map(|d| [d[0], d[1], d[2]]).collect();
        Ok((grads, d_triplets))
    }
}

impl ParamSet for Discriminator {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.lstm1.collect(&format!("{prefix}lstm1."), out);
        self.lstm2.collect(&format!("{prefix}lstm2."), out);
        self.fc_out.collect(&format!("{prefix}fc_out."), out);
    }

    fn collect_mut<'a>(&'a mut self, out: &mut Vec<&'a mut [f64]>) {
        self.lstm1.collect_mut(out);
        self.lstm2.collect_mut(out);
        self.fc_out.collect_mut(out);
    }
}
