//! Explore/exploit baselines over a finite candidate pool of `pool` arms.
//!
//! Exploration draws a slot uniformly from the pool; slots already opened map
//! to that arm, unopened slots map to opening a fresh arm. Because arms are
//! exchangeable draws from the same source, "slot j" and "the j-th arm
//! opened" have the same distribution, so this implements a uniform pick over
//! the pool without materializing unopened arms. Exploitation plays the
//! opened arm with the smallest sample mean, ties to the lowest index.
//!
//! Randomized variants draw their explore/exploit coin first and the pool
//! slot second, which pins the reproducible draw order.

use rand::{Rng, RngCore};

use crate::error::Error;
use crate::game::{Action, GameState};
use crate::policy::{best_mean_arm, Policy};

fn check(eps: f64, pool: u64) -> Result<(), Error> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("eps must lie in (0, 1], got {eps}")));
    }
    if pool == 0 {
        return Err(Error::Config("the candidate pool must hold at least 1 arm".into()));
    }
    Ok(())
}

fn explore(game: &GameState, pool: u64, rng: &mut dyn RngCore) -> Action {
    let slot = rng.gen_range(1..=pool) as usize;
    if slot <= game.arm_count() {
        Action::Play(slot)
    } else {
        Action::NewArm
    }
}

fn exploit(game: &GameState, pool: u64, rng: &mut dyn RngCore) -> Action {
    match best_mean_arm(game) {
        Some(k) => Action::Play(k),
        None => explore(game, pool, rng),
    }
}

/// Explores for the first `eps * n` plays, exploits for the rest.
#[derive(Debug, Clone)]
pub struct EpsilonFirst {
    eps: f64,
    pool: u64,
}

impl EpsilonFirst {
    pub fn new(eps: f64, pool: u64) -> Result<Self, Error> {
        check(eps, pool)?;
        Ok(EpsilonFirst { eps, pool })
    }
}

impl Policy for EpsilonFirst {
    fn choose(&mut self, game: &GameState, rng: &mut dyn RngCore) -> Result<Action, Error> {
        if (game.plays() as f64) < self.eps * game.horizon() as f64 {
            Ok(explore(game, self.pool, rng))
        } else {
            Ok(exploit(game, self.pool, rng))
        }
    }
}

/// Explores with probability `eps` on every play, exploits otherwise.
#[derive(Debug, Clone)]
pub struct EpsilonGreedy {
    eps: f64,
    pool: u64,
}

impl EpsilonGreedy {
    pub fn new(eps: f64, pool: u64) -> Result<Self, Error> {
        check(eps, pool)?;
        Ok(EpsilonGreedy { eps, pool })
    }
}

impl Policy for EpsilonGreedy {
    fn choose(&mut self, game: &GameState, rng: &mut dyn RngCore) -> Result<Action, Error> {
        if rng.gen::<f64>() < self.eps {
            Ok(explore(game, self.pool, rng))
        } else {
            Ok(exploit(game, self.pool, rng))
        }
    }
}

/// Explores with probability min(1, eps / m) on the m-th play (1-based), so
/// exploration fades as evidence accumulates.
#[derive(Debug, Clone)]
pub struct EpsilonDecreasing {
    eps: f64,
    pool: u64,
}

impl EpsilonDecreasing {
    pub fn new(eps: f64, pool: u64) -> Result<Self, Error> {
        check(eps, pool)?;
        Ok(EpsilonDecreasing { eps, pool })
    }
}

impl Policy for EpsilonDecreasing {
    fn choose(&mut self, game: &GameState, rng: &mut dyn RngCore) -> Result<Action, Error> {
        let m = game.plays() + 1;
        let probability = (self.eps / m as f64).min(1.0);
        if rng.gen::<f64>() < probability {
            Ok(explore(game, self.pool, rng))
        } else {
            Ok(exploit(game, self.pool, rng))
        }
    }
}
