use rand::RngCore;

use crate::arm::ArmState;
use crate::error::Error;
use crate::game::{Action, GameState};
use crate::policy::Policy;

/// Width parameter used when none is given explicitly: log log n, clamped
/// below at 1 so toy horizons do not produce zero or negative widths.
pub fn log_log_schedule(n: u64) -> f64 {
    (n as f64).ln().ln().max(1.0)
}

/// Lower confidence statistic for one arm: max(mean / b, mean - c * sd / sqrt(t)).
///
/// The first branch keeps the bound a fixed fraction of the mean so that even
/// a zero-variance arm is eventually ruled out; the second is the usual
/// mean-minus-width form. Requires at least one pull.
pub fn confidence_bound(state: &ArmState, b: f64, c: f64) -> Result<f64, Error> {
    let (mean, sd) = state.mean_and_sd()?;
    let t = state.pulls as f64;
    Ok((mean / b).max(mean - c * sd / t.sqrt()))
}

/// Threshold rule with a fixed target: keep drawing from the current arm
/// while its confidence bound stays at or below the target, abandon it for a
/// fresh arm otherwise. Abandoned arms are never resumed.
#[derive(Debug, Clone)]
pub struct Cbt {
    target: f64,
    b: f64,
    c: f64,
}

impl Cbt {
    pub fn new(target: f64, b: f64, c: f64) -> Result<Self, Error> {
        if !(target >= 0.0) || !target.is_finite() {
            return Err(Error::Config(format!("target must be finite and >= 0, got {target}")));
        }
        if !(b > 0.0) || !(c >= 0.0) {
            return Err(Error::Config(format!(
                "widths must satisfy b > 0 and c >= 0, got b={b} c={c}"
            )));
        }
        Ok(Cbt { target, b, c })
    }

    pub fn target(&self) -> f64 {
        self.target
    }
}

impl Policy for Cbt {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        let current = match game.newest_arm() {
            None => return Ok(Action::NewArm),
            Some(k) => k,
        };
        let state = game.arm(current)?;
        if state.pulls == 0 {
            return Ok(Action::Play(current));
        }
        if confidence_bound(state, self.b, self.c)? <= self.target {
            Ok(Action::Play(current))
        } else {
            Ok(Action::NewArm)
        }
    }
}

/// Threshold rule that learns its target from spent reward: the target after
/// m plays is (total reward so far) / horizon, and any opened arm whose
/// cached bound sits at or below it may be resumed. The arm with the lowest
/// bound is played; if every bound exceeds the target a fresh arm is opened.
#[derive(Debug, Clone)]
pub struct EmpiricalCbt {
    b: f64,
    c: f64,
    bounds: Vec<f64>,
}

impl EmpiricalCbt {
    pub fn new(b: f64, c: f64) -> Result<Self, Error> {
        if !(b > 0.0) || !(c >= 0.0) {
            return Err(Error::Config(format!(
                "widths must satisfy b > 0 and c >= 0, got b={b} c={c}"
            )));
        }
        Ok(EmpiricalCbt { b, c, bounds: Vec::new() })
    }

    fn refresh_cache(&mut self, game: &GameState) -> Result<(), Error> {
        self.bounds.clear();
        for arm in game.arms() {
            self.bounds.push(confidence_bound(arm, self.b, self.c)?);
        }
        Ok(())
    }
}

impl Policy for EmpiricalCbt {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        // The cache tracks observe() calls; rebuild if the caller drove the
        // game without reporting back.
        if self.bounds.len() != game.arm_count() {
            self.refresh_cache(game)?;
        }
        let target = game.total_reward() / game.horizon() as f64;
        let mut best: Option<(f64, usize)> = None;
        for (i, &bound) in self.bounds.iter().enumerate() {
            match best {
                Some((lowest, _)) if bound >= lowest => {}
                _ => best = Some((bound, i + 1)),
            }
        }
        match best {
            Some((lowest, k)) if lowest <= target => Ok(Action::Play(k)),
            _ => Ok(Action::NewArm),
        }
    }

    fn observe(&mut self, game: &GameState, arm: usize, _reward: f64) -> Result<(), Error> {
        let bound = confidence_bound(game.arm(arm)?, self.b, self.c)?;
        if arm == self.bounds.len() + 1 {
            self.bounds.push(bound);
        } else if arm <= self.bounds.len() {
            self.bounds[arm - 1] = bound;
        } else {
            return Err(Error::UnknownArm { arm, open: self.bounds.len() });
        }
        Ok(())
    }
}
