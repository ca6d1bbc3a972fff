//! Loss-spike detection and checkpoint rollback.
//!
//! A spike (a non-finite loss, or a loss above `mean + k * std` of a full
//! window of recent losses) rolls the run back to the latest checkpoint
//! strictly before the current step and scales the learning rate by 0.7.
//! After `stable_steps` consecutive non-spike steps the multiplier returns to
//! 1.0.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::schedule::LrSchedule;
use super::ControllerError;

pub const REDUCED_LR_MULTIPLIER: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub window: usize,
    pub k: f64,
    pub stable_steps: usize,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            window: 50,
            k: 4.0,
            stable_steps: 200,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if self.window == 0 || self.stable_steps == 0 || !(self.k.is_finite() && self.k >= 0.0) {
            return Err(ControllerError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Normal,
    Recovering,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Action {
    None,
    Rollback { to: u64, lr_multiplier: f64 },
    RestoreLr { lr_multiplier: f64 },
}

impl Action {
    pub fn label(&self) -> &'static str {
        match self {
            Action::None => "NONE",
            Action::Rollback { .. } => "ROLLBACK",
            Action::RestoreLr { .. } => "RESTORE_LR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: u64,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub phase: Phase,
    pub lr_multiplier: f64,
    pub loss_window: VecDeque<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub stable_count: usize,
    /// Step whose loss the next call to [`ControllerState::step`] observes.
    pub current_step: u64,
    pub config: ControllerConfig,
}

impl ControllerState {
    pub fn new(config: ControllerConfig) -> Result<Self, ControllerError> {
        config.validate()?;
        Ok(Self {
            phase: Phase::Normal,
            lr_multiplier: 1.0,
            loss_window: VecDeque::with_capacity(config.window),
            checkpoints: Vec::new(),
            stable_count: 0,
            current_step: 0,
            config,
        })
    }

    pub fn record_checkpoint(&mut self, step: u64, tag: impl Into<String>) -> Result<(), ControllerError> {
        if let Some(last) = self.checkpoints.last() {
            if step <= last.step {
                return Err(ControllerError::NonMonotonicStep { step, last: last.step });
            }
        }
        self.checkpoints.push(Checkpoint { step, tag: tag.into() });
        Ok(())
    }

    /// Latest checkpoint with `checkpoint.step < step`.
    pub fn latest_before(&self, step: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().rev().find(|c| c.step < step)
    }

    pub fn effective_lr(&self, schedule: &LrSchedule) -> Result<f64, ControllerError> {
        Ok(schedule.lr_at(self.current_step)? * self.lr_multiplier)
    }

    fn window_stats(&self) -> (f64, f64) {
        let n = self.loss_window.len() as f64;
        let mean = self.loss_window.iter().sum::<f64>() / n;
        let var = self.loss_window.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    pub fn is_spike(&self, loss: f64) -> bool {
        if !loss.is_finite() {
            return true;
        }
        if self.loss_window.len() < self.config.window {
            return false;
        }
        let (mean, std) = self.window_stats();
        loss > mean + self.config.k * std
    }

    /// Observe the loss at `current_step` and decide what to do.
    pub fn step(&mut self, loss: f64) -> Result<Action, ControllerError> {
        if self.is_spike(loss) {
            let target = self
                .latest_before(self.current_step)
                .map(|c| c.step)
                .ok_or(ControllerError::NoCheckpointAvailable { step: self.current_step })?;
            // checkpoints past the target belong to the abandoned trajectory
            self.checkpoints.retain(|c| c.step <= target);
            self.phase = Phase::Recovering;
            self.lr_multiplier = REDUCED_LR_MULTIPLIER;
            self.current_step = target;
            self.loss_window.clear();
            self.stable_count = 0;
            return Ok(Action::Rollback {
                to: target,
                lr_multiplier: REDUCED_LR_MULTIPLIER,
            });
        }

        if self.loss_window.len() == self.config.window {
            self.loss_window.pop_front();
        }
        self.loss_window.push_back(loss);
        self.current_step += 1;

        if self.phase == Phase::Recovering {
            self.stable_count += 1;
            if self.stable_count >= self.config.stable_steps {
                self.phase = Phase::Normal;
                self.lr_multiplier = 1.0;
                self.stable_count = 0;
                return Ok(Action::RestoreLr { lr_multiplier: 1.0 });
            }
        }
        Ok(Action::None)
    }
}

/// Pure form of [`ControllerState::step`].
pub fn controller_step(state: &ControllerState, loss: f64) -> Result<(ControllerState, Action), ControllerError> {
    let mut next = state.clone();
    let action = next.step(loss)?;
    Ok((next, action))
}
