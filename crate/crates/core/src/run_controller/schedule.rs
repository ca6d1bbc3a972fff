use serde::{Deserialize, Serialize};

use super::ControllerError;

/// Linear warmup from 0 to `peak`, then linear decay to 0 at `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub peak: f64,
    pub warmup_steps: u64,
    pub total_steps: u64,
}

impl LrSchedule {
    pub const DEFAULT_PEAK: f64 = 1e-4;
    pub const DEFAULT_WARMUP: u64 = 2000;

    pub fn new(peak: f64, warmup_steps: u64, total_steps: u64) -> Result<Self, ControllerError> {
        let s = Self {
            peak,
            warmup_steps,
            total_steps,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_defaults(total_steps: u64) -> Result<Self, ControllerError> {
        Self::new(Self::DEFAULT_PEAK, Self::DEFAULT_WARMUP, total_steps)
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return Err(ControllerError::InvalidSchedule(format!("peak {} must be positive", self.peak)));
        }
        if self.warmup_steps == 0 || self.warmup_steps >= self.total_steps {
            return Err(ControllerError::InvalidSchedule(format!(
                "need 0 < warmup ({}) < total ({})",
                self.warmup_steps, self.total_steps
            )));
        }
        Ok(())
    }

    pub fn lr_at(&self, step: u64) -> Result<f64, ControllerError> {
        if step > self.total_steps {
            return Err(ControllerError::OutOfRange {
                step,
                total: self.total_steps,
            });
        }
        // The ratio is formed first so the boundary values are exact.
        Ok(if step <= self.warmup_steps {
            self.peak * (step as f64 / self.warmup_steps as f64)
        } else {
            self.peak * ((self.total_steps - step) as f64 / (self.total_steps - self.warmup_steps) as f64)
        })
    }
}

pub fn lr_at(step: u64, schedule: &LrSchedule) -> Result<f64, ControllerError> {
    schedule.lr_at(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_peak() {
        let s = LrSchedule::with_defaults(10_000).unwrap();
        assert_eq!(s.lr_at(0).unwrap(), 0.0);
        assert_eq!(s.lr_at(2000).unwrap(), 1e-4);
        assert_eq!(s.lr_at(10_000).unwrap(), 0.0);
        assert_eq!(s.lr_at(1000).unwrap(), 5e-5);
        assert_eq!(s.lr_at(6000).unwrap(), 5e-5);
    }

    #[test]
    fn out_of_range_and_invalid() {
        let s = LrSchedule::with_defaults(4000).unwrap();
        assert!(matches!(s.lr_at(4001), Err(ControllerError::OutOfRange { .. })));
        assert!(LrSchedule::new(1e-4, 2000, 2000).is_err());
        assert!(LrSchedule::new(1e-4, 0, 10).is_err());
        assert!(LrSchedule::new(0.0, 1, 10).is_err());
    }
}
