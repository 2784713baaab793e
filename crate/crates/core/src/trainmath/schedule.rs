use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear warmup, constant plateau, then cosine decay to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub warmup_epochs: f64,
    pub plateau_end: f64,
    pub total_epochs: f64,
    pub base_lr: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            warmup_epochs: 5.0,
            plateau_end: 10.0,
            total_epochs: 25.0,
            base_lr: 3.5e-4,
        }
    }
}

impl ScheduleConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.warmup_epochs > 0.0
            && self.warmup_epochs <= self.plateau_end
            && self.plateau_end < self.total_epochs
            && self.total_epochs.is_finite();
        if !ok {
            return Err(Error::InvalidParam(format!(
                "schedule needs 0 < warmup ({}) <= plateau_end ({}) < total ({})",
                self.warmup_epochs, self.plateau_end, self.total_epochs
            )));
        }
        Ok(())
    }

    pub fn lr(&self, epoch: f64) -> Result<f64> {
        Ok(self.base_lr * lr_ratio(epoch, self)?)
    }
}

/// Multiplier on the base learning rate at a (possibly fractional) epoch.
///
/// * `[0, warmup)`: `0.99 * epoch / warmup + 0.01`
/// * `[warmup, plateau_end)`: `1`
/// * `[plateau_end, total)`: `0.5 * (cos((epoch - plateau_end) / (total - plateau_end) * pi) + 1)`
pub fn lr_ratio(epoch: f64, cfg: &ScheduleConfig) -> Result<f64> {
    cfg.validate()?;
    if !(epoch >= 0.0 && epoch < cfg.total_epochs) {
        return Err(Error::EpochOutOfRange {
            epoch,
            total: cfg.total_epochs,
        });
    }
    Ok(if epoch < cfg.warmup_epochs {
        0.99 * epoch / cfg.warmup_epochs + 0.01
    } else if epoch < cfg.plateau_end {
        1.0
    } else {
        let t = (epoch - cfg.plateau_end) / (cfg.total_epochs - cfg.plateau_end);
        0.5 * ((t * PI).cos() + 1.0)
    })
}
