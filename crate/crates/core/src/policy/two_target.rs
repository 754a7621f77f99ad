use rand::RngCore;

use crate::error::Error;
use crate::game::{Action, GameState};
use crate::policy::{require_binary, Policy};

/// Two-checkpoint rule for binary costs. An arm must show at least `s1`
/// successes when its first failure arrives and at least `sf` successes when
/// its `f`-th failure arrives; missing either checkpoint discards the arm,
/// passing both commits to it for the rest of the horizon.
#[derive(Debug, Clone)]
pub struct TwoTarget {
    f: u64,
    s1: u64,
    sf: u64,
    committed: Option<usize>,
}

impl TwoTarget {
    pub fn new(f: u32, s1: u64, sf: u64) -> Result<Self, Error> {
        if f < 2 {
            return Err(Error::Config(format!(
                "the between-checkpoint count f must be at least 2, got {f}"
            )));
        }
        Ok(TwoTarget { f: u64::from(f), s1, sf, committed: None })
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    pub fn targets(&self) -> (u64, u64) {
        (self.s1, self.sf)
    }
}

impl Policy for TwoTarget {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        if let Some(k) = self.committed {
            return Ok(Action::Play(k));
        }
        let current = match game.newest_arm() {
            None => return Ok(Action::NewArm),
            Some(k) => k,
        };
        let state = game.arm(current)?;
        let failures = state.sum as u64;
        let successes = state.pulls - failures;
        if failures == 0 {
            return Ok(Action::Play(current));
        }
        if failures >= self.f {
            if successes >= self.sf {
                self.committed = Some(current);
                return Ok(Action::Play(current));
            }
            return Ok(Action::NewArm);
        }
        // Between the first failure and the f-th: the arm survives only if
        // it met the early target when that first failure arrived. Successes
        // never decrease, so re-checking here is equivalent.
        if successes >= self.s1 {
            Ok(Action::Play(current))
        } else {
            Ok(Action::NewArm)
        }
    }

    fn observe(&mut self, _game: &GameState, _arm: usize, reward: f64) -> Result<(), Error> {
        require_binary(reward).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    fn game_from(horizon: u64, arms: &[&[f64]]) -> GameState {
        let mut game = GameState::new(horizon);
        for rewards in arms {
            let k = game.open_arm();
            for &r in *rewards {
                game.record(k, r).unwrap();
            }
        }
        game
    }

    fn rng() -> StepRng {
        StepRng::new(0, 0)
    }

    #[test]
    fn first_checkpoint_discards_short_arms() {
        // Three successes then a failure against an early target of 7.
        let mut policy = TwoTarget::new(3, 7, 67).unwrap();
        let game = game_from(1000, &[&[0.0, 0.0, 0.0, 1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::NewArm);
    }

    #[test]
    fn clean_arms_keep_playing() {
        let mut policy = TwoTarget::new(3, 7, 67).unwrap();
        let empty = game_from(1000, &[]);
        assert_eq!(policy.choose(&empty, &mut rng()).unwrap(), Action::NewArm);
        let clean = game_from(1000, &[&[0.0, 0.0]]);
        assert_eq!(policy.choose(&clean, &mut rng()).unwrap(), Action::Play(1));
    }

    #[test]
    fn surviving_the_first_checkpoint_continues_to_the_last() {
        let mut policy = TwoTarget::new(3, 2, 5).unwrap();
        // Two successes at the first failure meets s1 = 2; not yet at f = 3
        // failures, so the arm continues.
        let game = game_from(1000, &[&[0.0, 0.0, 1.0, 1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::Play(1));
        assert_eq!(policy.committed(), None);
    }

    #[test]
    fn final_checkpoint_commits_or_discards() {
        // f = 3, sf = 5: six successes at the third failure commits.
        let mut pass = TwoTarget::new(3, 2, 5).unwrap();
        let good = game_from(1000, &[&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]]);
        assert_eq!(pass.choose(&good, &mut rng()).unwrap(), Action::Play(1));
        assert_eq!(pass.committed(), Some(1));
        // Commitment sticks even as the record worsens.
        let worse =
            game_from(1000, &[&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0], &[0.0]]);
        assert_eq!(pass.choose(&worse, &mut rng()).unwrap(), Action::Play(1));

        // Only three successes at the third failure misses sf = 5.
        let mut fail = TwoTarget::new(3, 2, 5).unwrap();
        let bad = game_from(1000, &[&[0.0, 0.0, 1.0, 0.0, 1.0, 1.0]]);
        assert_eq!(fail.choose(&bad, &mut rng()).unwrap(), Action::NewArm);
        assert_eq!(fail.committed(), None);
    }

    #[test]
    fn needs_at_least_two_checkpointed_failures() {
        assert!(TwoTarget::new(0, 1, 1).is_err());
        assert!(TwoTarget::new(1, 1, 1).is_err());
        assert!(TwoTarget::new(2, 1, 1).is_ok());
    }

    #[test]
    fn non_binary_rewards_are_rejected() {
        let game = game_from(10, &[&[0.0]]);
        let mut policy = TwoTarget::new(3, 7, 67).unwrap();
        assert!(policy.observe(&game, 1, 0.3).is_err());
        assert!(policy.observe(&game, 1, 0.0).is_ok());
    }
}
