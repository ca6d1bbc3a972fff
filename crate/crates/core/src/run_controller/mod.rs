//! Training-run control without a network: the cross-entropy objective, the
//! warmup/decay learning-rate schedule, and the spike-rollback state machine.

pub mod controller;
pub mod cross_entropy;
pub mod schedule;
pub mod simulate;

use thiserror::Error;

pub use controller::{
    controller_step, Action, Checkpoint, ControllerConfig, ControllerState, Phase, REDUCED_LR_MULTIPLIER,
};
pub use cross_entropy::{
    corpus_cross_entropy, cross_entropy, CrossEntropy, FnModel, NextTokenModel, TokenSequence, UniformModel,
    UnigramModel,
};
pub use schedule::{lr_at, LrSchedule};
pub use simulate::{simulate_run, TraceRow};

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid controller config: {0}")]
    InvalidConfig(String),
    #[error("step {step} beyond schedule end {total}")]
    OutOfRange { step: u64, total: u64 },
    #[error("token sequence is empty")]
    EmptySequence,
    #[error("token {id} outside vocabulary of {vocab_size}")]
    TokenOutOfVocab { id: u32, vocab_size: usize },
    #[error("model returned probability {prob} at position {position}")]
    InvalidDistribution { position: usize, prob: f64 },
    #[error("checkpoint step {step} not after last recorded step {last}")]
    NonMonotonicStep { step: u64, last: u64 },
    #[error("loss spike at step {step} with no earlier checkpoint")]
    NoCheckpointAvailable { step: u64 },
    #[error("loss stream is empty")]
    EmptyLosses,
}
