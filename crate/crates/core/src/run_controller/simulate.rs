use serde::{Deserialize, Serialize};

use super::controller::{Action, ControllerConfig, ControllerState};
use super::schedule::LrSchedule;
use super::ControllerError;

/// One observed loss: the step it was observed at, the learning rate in
/// effect for that step, and the controller's response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: u64,
    pub effective_lr: f64,
    pub loss: f64,
    pub action: Action,
}

/// Replay a loss stream through the controller.
///
/// A checkpoint is taken at every step that is a multiple of
/// `checkpoint_interval` (including step 0) before its loss is observed,
/// unless one already exists there.
pub fn simulate_run(
    schedule: &LrSchedule,
    losses: &[f64],
    checkpoint_interval: u64,
    config: ControllerConfig,
) -> Result<Vec<TraceRow>, ControllerError> {
    if losses.is_empty() {
        return Err(ControllerError::EmptyLosses);
    }
    if checkpoint_interval == 0 {
        return Err(ControllerError::InvalidConfig("checkpoint interval must be positive".into()));
    }
    schedule.validate()?;
    let mut state = ControllerState::new(config)?;
    let mut trace = Vec::with_capacity(losses.len());
    for &loss in losses {
        let step = state.current_step;
        let due = step % checkpoint_interval == 0;
        if due && state.checkpoints.last().map_or(true, |c| c.step < step) {
            state.record_checkpoint(step, format!("step-{step}"))?;
        }
        let effective_lr = state.effective_lr(schedule)?;
        let action = state.step(loss)?;
        trace.push(TraceRow {
            step,
            effective_lr,
            loss,
            action,
        });
    }
    Ok(trace)
}
