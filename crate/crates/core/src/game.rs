//! Play-level state shared by every policy and the engine.

use crate::arm::ArmState;
use crate::error::Error;

/// What a policy wants next: pull an already open arm, identified by its
/// 1-based opening order, or open a fresh one. Opening delivers the new
/// arm's first reward in the same play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Play(usize),
    NewArm,
}

/// Ledger of one game in progress: the horizon n, the number of plays spent
/// so far, the running cost total, and per-arm statistics in opening order.
#[derive(Debug, Clone)]
pub struct GameState {
    horizon: u64,
    plays: u64,
    total_reward: f64,
    arms: Vec<ArmState>,
}

impl GameState {
    pub fn new(horizon: u64) -> Self {
        GameState { horizon, plays: 0, total_reward: 0.0, arms: Vec::new() }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Plays recorded so far.
    pub fn plays(&self) -> u64 {
        self.plays
    }

    pub fn remaining(&self) -> u64 {
        self.horizon - self.plays
    }

    /// Cost paid across all plays so far.
    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmState] {
        &self.arms
    }

    /// The arm opened most recently, if any.
    pub fn newest_arm(&self) -> Option<usize> {
        if self.arms.is_empty() {
            None
        } else {
            Some(self.arms.len())
        }
    }

    /// Looks up an arm by its 1-based index.
    pub fn arm(&self, k: usize) -> Result<&ArmState, Error> {
        if k == 0 || k > self.arms.len() {
            return Err(Error::UnknownArm { arm: k, open: self.arms.len() });
        }
        Ok(&self.arms[k - 1])
    }

    /// Opens the next arm and returns its 1-based index.
    pub fn open_arm(&mut self) -> usize {
        let index = self.arms.len() + 1;
        self.arms.push(ArmState::new(index));
        index
    }

    /// Records one reward on arm k. Fails without mutating if the horizon is
    /// spent, the arm does not exist, or the reward is negative.
    pub fn record(&mut self, k: usize, reward: f64) -> Result<(), Error> {
        if self.plays >= self.horizon {
            return Err(Error::HorizonSpent { horizon: self.horizon });
        }
        if k == 0 || k > self.arms.len() {
            return Err(Error::UnknownArm { arm: k, open: self.arms.len() });
        }
        self.arms[k - 1].update(reward)?;
        self.plays += 1;
        self.total_reward += reward;
        Ok(())
    }
}

/// What a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Arms opened during the run.
    pub arms_opened: usize,
    /// Pulls per arm, in opening order. These sum to the horizon.
    pub pulls: Vec<u64>,
    /// True mean cost per arm, in the same order. For replayed datasets this
    /// is the arm's full-trace mean.
    pub true_means: Vec<f64>,
    /// Realized regret: sum over arms of pulls times true mean.
    pub regret: f64,
}
