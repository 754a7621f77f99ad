//! The game loop and the Monte Carlo harness around it.
//!
//! A single run is sequential: the policy picks an action, the engine
//! resolves it into a reward, and the reward is folded back into the game
//! and reported to the policy. Opening a fresh arm delivers that arm's first
//! reward in the same trial, so every trial costs exactly one play.
//!
//! Replication r runs on its own generator seeded with base seed + r, which
//! makes results independent of how replications are scheduled across
//! threads. The summary reduction walks runs in replication order with
//! compensated sums, so a rerun reproduces the same bytes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::error::Error;
use crate::game::{Action, GameState, RunRecord};
use crate::policy::{best_mean_arm, BuildContext, Policy, PolicySpec};
use crate::prior::{lambda_of, PriorModel};
use crate::reward::{DatasetPool, ReplayStream, RewardModel};

/// Where arms come from: fresh DNA from a prior plus a reward family, or
/// replayed traces from a recorded dataset.
#[derive(Clone)]
pub enum ArmSource {
    Synthetic { prior: PriorModel, reward: RewardModel },
    Dataset(Arc<DatasetPool>),
}

impl ArmSource {
    /// Short text for the CSV prior column.
    pub fn label(&self) -> String {
        match self {
            ArmSource::Synthetic { prior, .. } => prior.to_string(),
            ArmSource::Dataset(_) => "dataset".to_string(),
        }
    }
}

impl std::fmt::Debug for ArmSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArmSource::Synthetic { prior, reward } => {
                f.debug_struct("Synthetic").field("prior", prior).field("reward", reward).finish()
            }
            ArmSource::Dataset(pool) => {
                f.debug_struct("Dataset").field("arms", &pool.arm_count()).finish()
            }
        }
    }
}

/// Everything one table cell needs: the rule, the arm source, the horizon,
/// and the replication plan.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub policy: PolicySpec,
    pub source: ArmSource,
    pub horizon: u64,
    pub replications: u64,
    pub base_seed: u64,
    /// Worker threads for replications; 0 means the process default.
    pub jobs: usize,
    /// Retain per-run records in the summary (memory scales with R).
    pub keep_runs: bool,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("need at least 1 replication".into()));
        }
        Ok(())
    }

    /// Experimentation price for synthetic sources; datasets have none.
    fn price(&self) -> Result<Option<f64>, Error> {
        match &self.source {
            ArmSource::Synthetic { prior, reward } => Ok(Some(lambda_of(prior, reward)?)),
            ArmSource::Dataset(_) => Ok(None),
        }
    }

    fn build_policy(&self, price: Option<f64>) -> Result<Box<dyn Policy>, Error> {
        let (prior, pool_arms) = match &self.source {
            ArmSource::Synthetic { prior, .. } => (Some(prior), None),
            ArmSource::Dataset(pool) => (None, Some(pool.arm_count() as u64)),
        };
        self.policy.build(&BuildContext { n: self.horizon, prior, lambda: price, pool_arms })
    }
}

/// Mean regret across replications, with the provenance needed to reproduce
/// it.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    pub policy: String,
    pub prior: String,
    pub horizon: u64,
    pub replications: u64,
    pub mean_regret: f64,
    pub standard_error: f64,
    pub wall_time_ms: u64,
    pub base_seed: u64,
    pub runs: Option<Vec<RunRecord>>,
}

/// Plays one full game. Deterministic in (config, seed).
pub fn simulate_run(config: &ExperimentConfig, seed: u64) -> Result<RunRecord, Error> {
    config.validate()?;
    let price = config.price()?;
    run_replication(config, price, seed)
}

/// Runs every replication (seed = base seed + r), in parallel when allowed,
/// and reduces to mean and standard error in replication order.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<MonteCarloSummary, Error> {
    config.validate()?;
    let price = config.price()?;
    let started = Instant::now();

    let replicate = || -> Result<Vec<RunRecord>, Error> {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, price, config.base_seed.wrapping_add(r)))
            .collect()
    };
    let runs = if config.jobs == 0 {
        replicate()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build a {}-thread pool: {e}", config.jobs)))?
            .install(replicate)?
    };

    let r = runs.len() as f64;
    let mean = kahan_sum(runs.iter().map(|run| run.regret)) / r;
    let standard_error = if runs.len() < 2 {
        0.0
    } else {
        let variance = kahan_sum(runs.iter().map(|run| (run.regret - mean).powi(2))) / (r - 1.0);
        (variance / r).sqrt()
    };

    Ok(MonteCarloSummary {
        policy: config.policy.to_string(),
        prior: config.source.label(),
        horizon: config.horizon,
        replications: config.replications,
        mean_regret: mean,
        standard_error,
        wall_time_ms: started.elapsed().as_millis() as u64,
        base_seed: config.base_seed,
        runs: config.keep_runs.then_some(runs),
    })
}

/// Writes one CSV row per summary. Timings are reported as 0 unless asked
/// for, so that reruns with the same seed emit identical bytes.
pub fn write_csv<W: Write>(
    summaries: &[MonteCarloSummary],
    include_timing: bool,
    out: W,
) -> Result<(), Error> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "policy",
        "prior",
        "n",
        "R",
        "mean_regret",
        "se",
        "wall_time_ms",
        "base_seed",
    ])?;
    for s in summaries {
        let wall = if include_timing { s.wall_time_ms } else { 0 };
        writer.write_record([
            s.policy.as_str(),
            s.prior.as_str(),
            &s.horizon.to_string(),
            &s.replications.to_string(),
            &s.mean_regret.to_string(),
            &s.standard_error.to_string(),
            &wall.to_string(),
            &s.base_seed.to_string(),
        ])?;
    }
    writer.flush().map_err(Error::Io)?;
    Ok(())
}

fn run_replication(
    config: &ExperimentConfig,
    price: Option<f64>,
    seed: u64,
) -> Result<RunRecord, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut policy = config.build_policy(price)?;
    run_policy(policy.as_mut(), &config.source, config.horizon, &mut rng)
}

/// Per-arm dataset bookkeeping: the order arms come up in this run, and the
/// live reward streams of opened arms.
struct DatasetRun<'a> {
    pool: &'a DatasetPool,
    order: Vec<usize>,
    opened: usize,
    streams: Vec<ReplayStream>,
}

pub(crate) fn run_policy(
    policy: &mut dyn Policy,
    source: &ArmSource,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> Result<RunRecord, Error> {
    let mut game = GameState::new(horizon);
    let mut true_means: Vec<f64> = Vec::new();
    let mut dataset = match source {
        ArmSource::Synthetic { .. } => None,
        ArmSource::Dataset(pool) => {
            let mut order: Vec<usize> = (0..pool.arm_count()).collect();
            order.shuffle(rng);
            Some(DatasetRun { pool, order, opened: 0, streams: Vec::new() })
        }
    };

    while game.remaining() > 0 {
        let action = policy.choose(&game, rng)?;
        let (k, reward) = match (&mut dataset, action) {
            (None, Action::Play(k)) => {
                let mu = *true_means
                    .get(k.wrapping_sub(1))
                    .ok_or(Error::UnknownArm { arm: k, open: true_means.len() })?;
                let ArmSource::Synthetic { reward, .. } = source else { unreachable!() };
                (k, reward.draw(mu, rng)?)
            }
            (None, Action::NewArm) => {
                let ArmSource::Synthetic { prior, reward } = source else { unreachable!() };
                let mu = prior.sample(rng);
                let k = game.open_arm();
                true_means.push(mu);
                (k, reward.draw(mu, rng)?)
            }
            (Some(run), Action::Play(k)) => {
                let stream = run
                    .streams
                    .get_mut(k.wrapping_sub(1))
                    .ok_or(Error::UnknownArm { arm: k, open: true_means.len() })?;
                (k, stream.next_reward()?)
            }
            (Some(run), Action::NewArm) => {
                if run.opened < run.order.len() {
                    let idx = run.order[run.opened];
                    run.opened += 1;
                    let mut stream = run.pool.replay(idx, rng);
                    let k = game.open_arm();
                    true_means.push(run.pool.mean(idx));
                    let first = stream.next_reward()?;
                    run.streams.push(stream);
                    (k, first)
                } else {
                    // Every recorded arm is open already: fall back to the
                    // best sample mean seen so far.
                    let k = best_mean_arm(&game).ok_or_else(|| {
                        Error::Config("no arms to recall in an empty pool".into())
                    })?;
                    (k, run.streams[k - 1].next_reward()?)
                }
            }
        };
        game.record(k, reward)?;
        policy.observe(&game, k, reward)?;
    }

    let pulls: Vec<u64> = game.arms().iter().map(|a| a.pulls).collect();
    let regret = game.arms().iter().map(|a| a.pulls as f64 * true_means[a.index - 1]).sum();
    Ok(RunRecord { arms_opened: game.arm_count(), pulls, true_means, regret })
}

pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut compensation = 0.0;
    for value in values {
        let adjusted = value - compensation;
        let next = sum + adjusted;
        compensation = (next - sum) - adjusted;
        sum = next;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Action;
    use crate::policy::{CountSpec, ScheduleSpec, TargetSpec};

    fn uniform_bernoulli(policy: PolicySpec, horizon: u64, replications: u64) -> ExperimentConfig {
        ExperimentConfig {
            policy,
            source: ArmSource::Synthetic {
                prior: PriorModel::Uniform01,
                reward: RewardModel::Bernoulli,
            },
            horizon,
            replications,
            base_seed: 11,
            jobs: 1,
            keep_runs: false,
        }
    }

    fn cbt_spec(zeta: f64) -> PolicySpec {
        PolicySpec::Cbt {
            zeta: TargetSpec::Fixed(zeta),
            b: ScheduleSpec::LogLog,
            c: ScheduleSpec::LogLog,
        }
    }

    fn constant_pool(lengths: &[(f64, usize)]) -> Arc<DatasetPool> {
        let traces = lengths.iter().map(|&(value, len)| vec![value; len]).collect();
        Arc::new(DatasetPool::from_traces(traces).unwrap())
    }

    #[test]
    fn one_trial_opens_one_arm() {
        let config = uniform_bernoulli(cbt_spec(0.1), 1, 1);
        let run = simulate_run(&config, 5).unwrap();
        assert_eq!(run.arms_opened, 1);
        assert_eq!(run.pulls, vec![1]);
        assert!((run.regret - run.true_means[0]).abs() < 1e-12);
    }

    #[test]
    fn pulls_always_sum_to_the_horizon() {
        let specs = [
            cbt_spec(0.05),
            PolicySpec::EmpiricalCbt { b: ScheduleSpec::LogLog, c: ScheduleSpec::LogLog },
            PolicySpec::FFailure { f: 1 },
            PolicySpec::SRun { s: CountSpec::Auto },
            PolicySpec::NonRecallSRun { s: CountSpec::Auto },
            PolicySpec::MLearning { m: CountSpec::Auto },
            PolicySpec::TwoTarget { f: 3, s1: CountSpec::Auto, sf: CountSpec::Auto },
            PolicySpec::Ucbf { k: CountSpec::Auto },
            PolicySpec::EpsilonGreedy { eps: 0.1, pool: CountSpec::Auto },
        ];
        for spec in specs {
            let config = uniform_bernoulli(spec.clone(), 400, 1);
            let run = simulate_run(&config, 99).unwrap();
            assert_eq!(run.pulls.iter().sum::<u64>(), 400, "pulls for {spec:?}");
            assert_eq!(run.pulls.len(), run.arms_opened);
            assert_eq!(run.true_means.len(), run.arms_opened);
            assert!(run.pulls.iter().all(|&p| p > 0));
            let recomputed: f64 =
                run.pulls.iter().zip(&run.true_means).map(|(&p, &mu)| p as f64 * mu).sum();
            assert!((run.regret - recomputed).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_run() {
        let config = uniform_bernoulli(cbt_spec(0.07), 500, 1);
        let a = simulate_run(&config, 123).unwrap();
        let b = simulate_run(&config, 123).unwrap();
        assert_eq!(a.pulls, b.pulls);
        assert_eq!(a.regret.to_bits(), b.regret.to_bits());
        let c = simulate_run(&config, 124).unwrap();
        assert!(a.pulls != c.pulls || a.regret != c.regret);
    }

    #[test]
    fn zero_target_rejects_every_arm_at_its_first_failure() {
        let config = uniform_bernoulli(cbt_spec(0.0), 300, 1);
        let run = simulate_run(&config, 7).unwrap();
        // Only an unbroken run of successes keeps an arm alive. Run lengths
        // are heavy-tailed (one near-zero mean can hog the horizon), so the
        // count of opened arms swings wildly; just check arms keep turning
        // over and the budget is spent exactly.
        assert!(run.arms_opened > 5, "opened {}", run.arms_opened);
        assert_eq!(run.pulls.iter().sum::<u64>(), 300);
        assert!(run.pulls.iter().all(|&p| p > 0));
    }

    #[test]
    fn summary_is_independent_of_worker_count() {
        let base = uniform_bernoulli(cbt_spec(0.07), 120, 24);
        let serial = monte_carlo(&base).unwrap();
        let mut wide = base.clone();
        wide.jobs = 4;
        let parallel = monte_carlo(&wide).unwrap();
        assert_eq!(serial.mean_regret.to_bits(), parallel.mean_regret.to_bits());
        assert_eq!(serial.standard_error.to_bits(), parallel.standard_error.to_bits());
    }

    #[test]
    fn extending_replications_keeps_the_prefix() {
        let mut short = uniform_bernoulli(cbt_spec(0.07), 80, 10);
        short.keep_runs = true;
        let mut long = short.clone();
        long.replications = 20;
        let first = monte_carlo(&short).unwrap();
        let second = monte_carlo(&long).unwrap();
        let a = first.runs.unwrap();
        let b = second.runs.unwrap();
        for (x, y) in a.iter().zip(b.iter().take(10)) {
            assert_eq!(x.regret.to_bits(), y.regret.to_bits());
            assert_eq!(x.pulls, y.pulls);
        }
    }

    #[test]
    fn dataset_runs_replay_recorded_arms() {
        let pool = constant_pool(&[(0.4, 30), (0.9, 30)]);
        let config = ExperimentConfig {
            policy: PolicySpec::EmpiricalCbt { b: ScheduleSpec::LogLog, c: ScheduleSpec::LogLog },
            source: ArmSource::Dataset(pool),
            horizon: 20,
            replications: 1,
            base_seed: 3,
            jobs: 1,
            keep_runs: false,
        };
        let run = simulate_run(&config, 3).unwrap();
        assert_eq!(run.pulls.iter().sum::<u64>(), 20);
        // True means come from the traces, up to the rounding of their
        // sample averages.
        for mu in &run.true_means {
            assert!((mu - 0.4).abs() < 1e-12 || (mu - 0.9).abs() < 1e-12, "mean {mu}");
        }
    }

    #[test]
    fn exhausted_pool_recalls_the_best_sample_mean() {
        // Two arms of constant failures and a 1-failure rule: both arms are
        // abandoned, the pool runs dry, and the engine falls back to the
        // best (here: first) arm for the remaining trials.
        let pool = constant_pool(&[(1.0, 10), (1.0, 10)]);
        let config = ExperimentConfig {
            policy: PolicySpec::FFailure { f: 1 },
            source: ArmSource::Dataset(pool),
            horizon: 5,
            replications: 1,
            base_seed: 0,
            jobs: 1,
            keep_runs: false,
        };
        let run = simulate_run(&config, 0).unwrap();
        assert_eq!(run.pulls, vec![4, 1]);
        assert_eq!(run.regret, 5.0);
    }

    #[test]
    fn overplayed_trace_reports_exhaustion() {
        // One arm, three recorded successes, horizon five: the 1-failure
        // rule never leaves the arm and the trace runs out.
        let pool = constant_pool(&[(0.0, 3)]);
        let config = ExperimentConfig {
            policy: PolicySpec::FFailure { f: 1 },
            source: ArmSource::Dataset(pool),
            horizon: 5,
            replications: 1,
            base_seed: 0,
            jobs: 1,
            keep_runs: false,
        };
        assert!(matches!(simulate_run(&config, 0), Err(Error::TraceExhausted { .. })));
    }

    #[test]
    fn misbehaving_policy_is_caught() {
        struct Rogue;
        impl Policy for Rogue {
            fn choose(
                &mut self,
                _game: &GameState,
                _rng: &mut dyn rand::RngCore,
            ) -> Result<Action, Error> {
                Ok(Action::Play(7))
            }
        }
        let source =
            ArmSource::Synthetic { prior: PriorModel::Uniform01, reward: RewardModel::Bernoulli };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = run_policy(&mut Rogue, &source, 5, &mut rng).unwrap_err();
        assert!(matches!(err, Error::UnknownArm { arm: 7, .. }));
    }

    #[test]
    fn csv_rows_are_stable_and_quote_policy_strings() {
        let config = uniform_bernoulli(cbt_spec(0.05), 60, 5);
        let summary = monte_carlo(&config).unwrap();
        let mut first = Vec::new();
        write_csv(std::slice::from_ref(&summary), false, &mut first).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        assert!(text.starts_with("policy,prior,n,R,mean_regret,se,wall_time_ms,base_seed\n"));
        // The policy string contains commas, so the field must be quoted.
        assert!(text.contains("\"cbt:zeta=0.05,b=loglog,c=loglog\""));
        assert!(text.contains(",uniform,60,5,"));
        assert!(text.contains(",0,11\n"));

        // A rerun of the whole pipeline emits identical bytes.
        let again = monte_carlo(&config).unwrap();
        let mut second = Vec::new();
        write_csv(std::slice::from_ref(&again), false, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn timing_column_is_opt_in() {
        let config = uniform_bernoulli(cbt_spec(0.05), 30, 3);
        let mut summary = monte_carlo(&config).unwrap();
        summary.wall_time_ms = 42;
        let mut with = Vec::new();
        write_csv(std::slice::from_ref(&summary), true, &mut with).unwrap();
        assert!(String::from_utf8(with).unwrap().contains(",42,"));
        let mut without = Vec::new();
        write_csv(std::slice::from_ref(&summary), false, &mut without).unwrap();
        assert!(String::from_utf8(without).unwrap().contains(",0,"));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = uniform_bernoulli(cbt_spec(0.05), 0, 5);
        assert!(matches!(monte_carlo(&config), Err(Error::Config(_))));
        config.horizon = 10;
        config.replications = 0;
        assert!(matches!(monte_carlo(&config), Err(Error::Config(_))));
    }

    #[test]
    fn compensated_sum_tracks_the_exact_total() {
        // 10^5 copies of 0.1: the compensated sum lands on the correctly
        // rounded product while a naive loop drifts by orders more.
        let total = kahan_sum(std::iter::repeat_n(0.1, 100_000));
        assert!((total - 0.1 * 100_000.0).abs() < 1e-10);
    }
}
