use rand::RngCore;

use crate::error::Error;
use crate::game::{Action, GameState};
use crate::policy::Policy;

/// Width sequence for the index: how aggressively unexplored arms are
/// favoured as the play count m grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExplorationSchedule {
    /// sqrt(log m), the default.
    SqrtLog,
    /// A constant width, mainly for tests.
    Fixed(f64),
}

impl ExplorationSchedule {
    fn value(&self, plays: u64) -> f64 {
        match self {
            ExplorationSchedule::SqrtLog => (plays.max(1) as f64).ln().sqrt(),
            ExplorationSchedule::Fixed(e) => *e,
        }
    }
}

/// Index rule over a fixed pool of `k` arms. The pool is filled first (an
/// arm never pulled has index minus infinity); afterwards each play goes to
/// the arm minimizing mean - sqrt(2 * var * E/t) - E/t, a lower-confidence
/// index suited to costs, with ties to the lowest arm index.
#[derive(Debug, Clone)]
pub struct Ucbf {
    k: u64,
    schedule: ExplorationSchedule,
}

impl Ucbf {
    pub fn new(k: u64, schedule: ExplorationSchedule) -> Result<Self, Error> {
        if k == 0 {
            return Err(Error::Config("the arm pool must hold at least 1 arm".into()));
        }
        Ok(Ucbf { k, schedule })
    }

    pub fn pool_size(&self) -> u64 {
        self.k
    }
}

impl Policy for Ucbf {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        if (game.arm_count() as u64) < self.k {
            return Ok(Action::NewArm);
        }
        let width = self.schedule.value(game.plays());
        let mut best: Option<(f64, usize)> = None;
        for arm in game.arms() {
            if arm.pulls == 0 {
                return Ok(Action::Play(arm.index));
            }
            let (mean, sd) = arm.mean_and_sd()?;
            let t = arm.pulls as f64;
            let index = mean - (2.0 * sd * sd * width / t).sqrt() - width / t;
            match best {
                Some((lowest, _)) if index >= lowest => {}
                _ => best = Some((index, arm.index)),
            }
        }
        match best {
            Some((_, k)) => Ok(Action::Play(k)),
            None => Ok(Action::NewArm),
        }
    }
}
