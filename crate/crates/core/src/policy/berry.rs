//! Success-run strategies for binary costs. A success is a reward of 0 and a
//! failure a reward of 1; an arm's failure count is therefore its reward sum.

use rand::RngCore;

use crate::arm::ArmState;
use crate::error::Error;
use crate::game::{Action, GameState};
use crate::policy::{best_mean_arm, require_binary, Policy};

fn failures(state: &ArmState) -> u64 {
    state.sum as u64
}

fn positive(name: &str, value: u64) -> Result<u64, Error> {
    if value == 0 {
        return Err(Error::Config(format!("{name} must be at least 1")));
    }
    Ok(value)
}

/// Plays each arm until it has produced `f` failures, then moves on to a
/// fresh arm. Never recalls and never commits.
#[derive(Debug, Clone)]
pub struct FFailure {
    f: u64,
}

impl FFailure {
    pub fn new(f: u32) -> Result<Self, Error> {
        Ok(FFailure { f: positive("f", u64::from(f))? })
    }
}

impl Policy for FFailure {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        match game.newest_arm() {
            None => Ok(Action::NewArm),
            Some(k) if failures(game.arm(k)?) >= self.f => Ok(Action::NewArm),
            Some(k) => Ok(Action::Play(k)),
        }
    }

    fn observe(&mut self, _game: &GameState, _arm: usize, reward: f64) -> Result<(), Error> {
        require_binary(reward).map(|_| ())
    }
}

/// Tries up to `s` arms, leaving each at its first failure. Commits to an arm
/// whose first `s` rewards are all successes; failing that, once all `s` arms
/// have been tried, commits to the one with the best success proportion.
#[derive(Debug, Clone)]
pub struct SRun {
    s: u64,
    committed: Option<usize>,
}

impl SRun {
    pub fn new(s: u64) -> Result<Self, Error> {
        Ok(SRun { s: positive("s", s)?, committed: None })
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }
}

impl Policy for SRun {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        if let Some(k) = self.committed {
            return Ok(Action::Play(k));
        }
        let current = match game.newest_arm() {
            None => return Ok(Action::NewArm),
            Some(k) => k,
        };
        let state = game.arm(current)?;
        if failures(state) == 0 {
            if state.pulls >= self.s {
                self.committed = Some(current);
            }
            return Ok(Action::Play(current));
        }
        if game.arm_count() as u64 >= self.s {
            let best = best_mean_arm(game).expect("some arm has pulls");
            self.committed = Some(best);
            return Ok(Action::Play(best));
        }
        Ok(Action::NewArm)
    }

    fn observe(&mut self, _game: &GameState, _arm: usize, reward: f64) -> Result<(), Error> {
        require_binary(reward).map(|_| ())
    }
}

/// Leaves each arm at its first failure, over an unlimited supply of arms,
/// committing only when an arm's first `s` rewards are all successes.
#[derive(Debug, Clone)]
pub struct NonRecallSRun {
    s: u64,
    committed: Option<usize>,
}

impl NonRecallSRun {
    pub fn new(s: u64) -> Result<Self, Error> {
        Ok(NonRecallSRun { s: positive("s", s)?, committed: None })
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }
}

impl Policy for NonRecallSRun {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        if let Some(k) = self.committed {
            return Ok(Action::Play(k));
        }
        let current = match game.newest_arm() {
            None => return Ok(Action::NewArm),
            Some(k) => k,
        };
        let state = game.arm(current)?;
        if failures(state) > 0 {
            return Ok(Action::NewArm);
        }
        if state.pulls >= self.s {
            self.committed = Some(current);
        }
        Ok(Action::Play(current))
    }

    fn observe(&mut self, _game: &GameState, _arm: usize, reward: f64) -> Result<(), Error> {
        require_binary(reward).map(|_| ())
    }
}

/// Spends the first `m` plays leaving arms at their first failure, then rides
/// the current arm until its next failure and commits to the arm with the
/// best success proportion seen so far.
#[derive(Debug, Clone)]
pub struct MLearning {
    m: u64,
    committed: Option<usize>,
}

impl MLearning {
    pub fn new(m: u64) -> Result<Self, Error> {
        Ok(MLearning { m: positive("m", m)?, committed: None })
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }
}

impl Policy for MLearning {
    fn choose(&mut self, game: &GameState, _rng: &mut dyn RngCore) -> Result<Action, Error> {
        if let Some(k) = self.committed {
            return Ok(Action::Play(k));
        }
        let current = match game.newest_arm() {
            None => return Ok(Action::NewArm),
            Some(k) => k,
        };
        let failed = failures(game.arm(current)?) > 0;
        if game.plays() < self.m {
            return Ok(if failed { Action::NewArm } else { Action::Play(current) });
        }
        if failed {
            let best = best_mean_arm(game).expect("some arm has pulls");
            self.committed = Some(best);
            return Ok(Action::Play(best));
        }
        Ok(Action::Play(current))
    }

    fn observe(&mut self, _game: &GameState, _arm: usize, reward: f64) -> Result<(), Error> {
        require_binary(reward).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
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
    fn one_failure_leaves_at_the_first_failure() {
        let mut policy = FFailure::new(1).unwrap();
        let empty = game_from(10, &[]);
        assert_eq!(policy.choose(&empty, &mut rng()).unwrap(), Action::NewArm);

        let running = game_from(10, &[&[0.0, 0.0]]);
        assert_eq!(policy.choose(&running, &mut rng()).unwrap(), Action::Play(1));

        let failed = game_from(10, &[&[0.0, 0.0, 1.0]]);
        assert_eq!(policy.choose(&failed, &mut rng()).unwrap(), Action::NewArm);
    }

    #[test]
    fn f_failure_counts_to_f() {
        let mut policy = FFailure::new(2).unwrap();
        let one = game_from(10, &[&[1.0, 0.0]]);
        assert_eq!(policy.choose(&one, &mut rng()).unwrap(), Action::Play(1));
        let two = game_from(10, &[&[1.0, 0.0, 1.0]]);
        assert_eq!(policy.choose(&two, &mut rng()).unwrap(), Action::NewArm);
    }

    #[test]
    fn binary_rewards_are_enforced() {
        let game = game_from(10, &[&[0.0]]);
        assert!(FFailure::new(1).unwrap().observe(&game, 1, 0.5).is_err());
        assert!(SRun::new(3).unwrap().observe(&game, 1, 2.0).is_err());
        assert!(NonRecallSRun::new(3).unwrap().observe(&game, 1, -0.0).is_ok());
        assert!(MLearning::new(5).unwrap().observe(&game, 1, 1.0).is_ok());
    }

    #[test]
    fn run_of_successes_commits() {
        let mut policy = SRun::new(3).unwrap();
        let game = game_from(20, &[&[0.0, 0.0, 0.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::Play(1));
        assert_eq!(policy.committed(), Some(1));

        // Committed means committed, whatever happens afterwards.
        let later = game_from(20, &[&[0.0, 0.0, 0.0, 1.0, 1.0], &[0.0]]);
        assert_eq!(policy.choose(&later, &mut rng()).unwrap(), Action::Play(1));
    }

    #[test]
    fn exhausted_arm_budget_commits_to_best_proportion() {
        let mut policy = SRun::new(2).unwrap();
        // Arm 1 failed at its second pull (proportion 1/2), arm 2 at its
        // first (proportion 1/1). Two arms tried = budget spent.
        let game = game_from(20, &[&[0.0, 1.0], &[1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::Play(1));
        assert_eq!(policy.committed(), Some(1));
    }

    #[test]
    fn budget_not_spent_moves_to_a_fresh_arm() {
        let mut policy = SRun::new(3).unwrap();
        let game = game_from(20, &[&[0.0, 1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::NewArm);
        assert_eq!(policy.committed(), None);
    }

    #[test]
    fn best_proportion_tie_goes_to_the_lowest_index() {
        let mut policy = SRun::new(2).unwrap();
        let game = game_from(20, &[&[1.0], &[1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::Play(1));
    }

    #[test]
    fn nonrecall_variant_never_runs_out_of_arms() {
        let mut policy = NonRecallSRun::new(3).unwrap();
        // Five arms already failed; budget-free, so keep opening.
        let game = game_from(50, &[&[1.0], &[1.0], &[1.0], &[1.0], &[0.0, 1.0]]);
        assert_eq!(policy.choose(&game, &mut rng()).unwrap(), Action::NewArm);
        assert_eq!(policy.committed(), None);

        let run = game_from(50, &[&[1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(policy.choose(&run, &mut rng()).unwrap(), Action::Play(2));
        assert_eq!(policy.committed(), Some(2));
    }

    #[test]
    fn learning_phase_follows_the_one_failure_rule() {
        let mut policy = MLearning::new(5).unwrap();
        let fresh = game_from(20, &[&[0.0, 0.0]]);
        assert_eq!(policy.choose(&fresh, &mut rng()).unwrap(), Action::Play(1));
        let failed = game_from(20, &[&[0.0, 1.0]]);
        assert_eq!(policy.choose(&failed, &mut rng()).unwrap(), Action::NewArm);
    }

    #[test]
    fn after_learning_rides_current_arm_until_failure_then_commits() {
        let mut policy = MLearning::new(5).unwrap();
        // Five plays done, current arm clean: keep riding it.
        let riding = game_from(20, &[&[0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(policy.choose(&riding, &mut rng()).unwrap(), Action::Play(2));
        assert_eq!(policy.committed(), None);

        // The next failure triggers commitment to the best proportion:
        // arm 1 at 1/2 versus arm 2 at 1/4.
        let done = game_from(20, &[&[0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]]);
        assert_eq!(policy.choose(&done, &mut rng()).unwrap(), Action::Play(2));
        assert_eq!(policy.committed(), Some(2));

        // Still committed even if the picture changes.
        let changed = game_from(20, &[&[0.0, 1.0], &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]]);
        assert_eq!(policy.choose(&changed, &mut rng()).unwrap(), Action::Play(2));
    }

    #[test]
    fn zero_counts_are_rejected() {
        assert!(FFailure::new(0).is_err());
        assert!(SRun::new(0).is_err());
        assert!(NonRecallSRun::new(0).is_err());
        assert!(MLearning::new(0).is_err());
    }

    proptest! {
        // Drive a full game on random binary rewards; once a committing
        // policy commits, every later action must replay the same arm.
        #[test]
        fn commitment_is_forever(
            rewards in proptest::collection::vec(0u8..2, 40),
            s in 1u64..6,
        ) {
            let mut game = GameState::new(rewards.len() as u64);
            let mut policy = SRun::new(s).unwrap();
            let mut rng = StepRng::new(0, 0);
            let mut committed_at: Option<usize> = None;
            for &r in &rewards {
                let action = policy.choose(&game, &mut rng).unwrap();
                if let Some(k) = committed_at {
                    prop_assert_eq!(action, Action::Play(k));
                }
                let k = match action {
                    Action::NewArm => game.open_arm(),
                    Action::Play(k) => k,
                };
                game.record(k, f64::from(r)).unwrap();
                policy.observe(&game, k, f64::from(r)).unwrap();
                if committed_at.is_none() {
                    committed_at = policy.committed();
                }
            }
        }
    }
}
