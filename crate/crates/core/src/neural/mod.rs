//! Differentiable building blocks: dense layers, LSTM cells, plain SGD.
//!
//! Everything runs in `f64`. Backward passes take an explicit trace returned
//! by the matching `forward_traced` call; an empty (default) trace is treated
//! as a missing forward pass.

mod activation;
mod checkpoint;
mod dense;
pub mod gradcheck;
mod lstm;
mod matrix;
mod params;
mod schedule;

pub use activation::{sigmoid, Activation};
pub use checkpoint::{Checkpoint, NamedTensor, CHECKPOINT_VERSION};
pub use dense::{Dense, DenseTrace};
pub use lstm::{LstmCell, LstmState, LstmStepTrace, LstmTrace, SequenceGradients, StepGradients};
pub use matrix::Matrix;
pub use params::{sgd_update, sum_ordered, ParamSet, TensorRef};
pub use schedule::{lr_schedule, LrSchedule};

/// Half-width of the uniform weight initialisation range.
pub const INIT_RANGE: f64 = 0.08;
