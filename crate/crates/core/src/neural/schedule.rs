use serde::{Deserialize, Serialize};

/// Exponentially decaying learning rate, `initial · decay^epoch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub initial: f64,
    pub decay: f64,
}

impl Default for LrSchedule {
    fn default() -> Self {
        Self {
            initial: 0.1,
            decay: 0.995,
        }
    }
}

impl LrSchedule {
    /// Rate for a zero-based epoch index.
    pub fn rate(&self, epoch: usize) -> f64 {
        self.initial * self.decay.powi(epoch as i32)
    }
}

/// The default GAN schedule: 0.1 at epoch 0, shrinking by 0.5% per epoch.
pub fn lr_schedule(epoch: usize) -> f64 {
    LrSchedule::default().rate(epoch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_point_one() {
        assert_eq!(lr_schedule(0), 0.1);
    }

    #[test]
    fn monotone_over_training_horizon() {
        for e in 0..400 {
            assert!(lr_schedule(e + 1) <= lr_schedule(e));
            assert!(lr_schedule(e) > 0.0);
        }
    }

    #[test]
    fn value_at_epoch_400() {
        // 0.1 · 0.995^400 = 0.1 · exp(400 · ln 0.995)
        let expected = 0.1 * (400.0 * 0.995f64.ln()).exp();
        assert!((lr_schedule(400) - expected).abs() < 1e-15);
        assert!((lr_schedule(400) - 0.0135).abs() < 1e-3);
    }
}
