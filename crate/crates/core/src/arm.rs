//! Running statistics for a single arm.

use crate::error::Error;

/// Pull count, reward sum, and sum of squares for one arm.
///
/// The standard deviation divides by the pull count t rather than t - 1, so
/// one observation yields sd = 0 instead of an undefined value. Policies rely
/// on that: a first pull must already produce a usable confidence bound.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArmState {
    /// Position in order of opening, starting at 1.
    pub index: usize,
    pub pulls: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl ArmState {
    pub fn new(index: usize) -> Self {
        ArmState { index, pulls: 0, sum: 0.0, sum_sq: 0.0 }
    }

    /// Folds one reward into the totals. Rewards are costs and must be
    /// non-negative; NaN is rejected by the same comparison.
    pub fn update(&mut self, reward: f64) -> Result<(), Error> {
        if !(reward >= 0.0) {
            return Err(Error::NegativeReward(reward));
        }
        self.pulls += 1;
        self.sum += reward;
        self.sum_sq += reward * reward;
        Ok(())
    }

    pub fn mean(&self) -> Result<f64, Error> {
        if self.pulls == 0 {
            return Err(Error::NoPulls);
        }
        Ok(self.sum / self.pulls as f64)
    }

    /// Sample mean and the divide-by-t standard deviation. Cancellation can
    /// push the variance a hair below zero; it is clamped.
    pub fn mean_and_sd(&self) -> Result<(f64, f64), Error> {
        let mean = self.mean()?;
        let var = (self.sum_sq / self.pulls as f64 - mean * mean).max(0.0);
        Ok((mean, var.sqrt()))
    }
}
