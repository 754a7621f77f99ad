//! Preset experiment registries and the planner that turns flags into
//! engine configs.

use std::sync::Arc;

use cbt_core::engine::{ArmSource, ExperimentConfig, MonteCarloSummary};
use cbt_core::prior::{benchmark_regret, lambda_of};
use cbt_core::reward::{DatasetPool, Orientation};
use cbt_core::{PolicySpec, PriorModel, RewardModel};

use crate::run::RunArgs;
use crate::Failure;

pub const DEFAULT_REPS: u64 = 10_000;
const SYNTHETIC_HORIZONS: [u64; 4] = [100, 1_000, 10_000, 100_000];
const DATASET_HORIZONS: [u64; 2] = [130, 1_300];

/// Rows of the three synthetic-prior tables, in printing order.
fn synthetic_rows(table: u8) -> Vec<&'static str> {
    match table {
        1 => vec![
            "cbt:zeta=asym",
            "empirical-cbt",
            "f-failure:f=1",
            "s-run:s=auto",
            "nonrecall-s-run:s=auto",
            "m-learning:m=auto",
            "two-target:f=3",
            "two-target:f=6",
            "two-target:f=9",
            "ucbf:K=auto",
        ],
        _ => vec![
            "cbt:zeta=asym",
            "empirical-cbt",
            "two-target:f=3",
            "two-target:f=6",
            "two-target:f=9",
            "ucbf:K=auto",
            "nonrecall-s-run:s=auto",
        ],
    }
}

/// Rows of the replay table: the learned-target rule against the three
/// epsilon baselines at their published exploration rates.
const DATASET_ROWS: [&str; 4] = [
    "empirical-cbt",
    "epsilon-greedy:eps=0.05",
    "epsilon-first:eps=0.15",
    "epsilon-decreasing:eps=1",
];

/// Everything the run command executes and prints.
#[derive(Debug)]
pub struct Plan {
    pub cells: Vec<ExperimentConfig>,
    /// Analytic lower-bound rows appended after the simulated ones.
    pub bounds: Vec<MonteCarloSummary>,
    /// Report per-play averages (replay table convention) instead of totals.
    pub per_play: bool,
    /// Smallest recorded arm mean, for the replay table's excess column.
    pub best_mean: Option<f64>,
}

pub fn plan(args: &RunArgs) -> Result<Plan, Failure> {
    let reps = args.reps.unwrap_or(DEFAULT_REPS);
    let seed = args.seed.unwrap_or(0);
    let jobs = args.jobs.unwrap_or(0);

    let make = |policy: PolicySpec, source: ArmSource, n: u64| ExperimentConfig {
        policy,
        source,
        horizon: n,
        replications: reps,
        base_seed: seed,
        jobs,
        keep_runs: false,
    };

    match args.table {
        Some(table @ 1..=3) => {
            if args.prior.is_some() || args.reward.is_some() {
                return Err(Failure::Usage(
                    "table presets fix the prior and reward; drop --prior/--reward or drop --table"
                        .into(),
                ));
            }
            if args.dataset.is_some() {
                return Err(Failure::Usage(format!(
                    "table {table} is synthetic and takes no --dataset"
                )));
            }
            let prior = match table {
                1 => PriorModel::Uniform01,
                2 => PriorModel::Sin,
                _ => PriorModel::OneMinusCos,
            };
            let rows = keep_rows(synthetic_rows(table), &args.policy, table)?;
            let ns = horizons(args, &SYNTHETIC_HORIZONS);
            let mut cells = Vec::new();
            for row in &rows {
                let spec: PolicySpec = row.parse()?;
                for &n in &ns {
                    let source = ArmSource::Synthetic {
                        prior: prior.clone(),
                        reward: RewardModel::Bernoulli,
                    };
                    cells.push(make(spec.clone(), source, n));
                }
            }
            let lambda = lambda_of(&prior, &RewardModel::Bernoulli)?;
            let (alpha, beta) = prior.tail_params();
            let bounds = ns
                .iter()
                .map(|&n| MonteCarloSummary {
                    policy: "lower-bound".into(),
                    prior: prior.to_string(),
                    horizon: n,
                    replications: 0,
                    mean_regret: benchmark_regret(alpha, beta, lambda, n),
                    standard_error: 0.0,
                    wall_time_ms: 0,
                    base_seed: seed,
                    runs: None,
                })
                .collect();
            Ok(Plan { cells, bounds, per_play: false, best_mean: None })
        }
        Some(4) => {
            if args.prior.is_some() || args.reward.is_some() {
                return Err(Failure::Usage(
                    "table 4 replays recorded rewards; drop --prior/--reward".into(),
                ));
            }
            let Some(path) = &args.dataset else {
                return Err(Failure::Usage(
                    "table 4 needs --dataset <file> with recorded reward traces \
                     (download: sourceforge.net/projects/bandit)"
                        .into(),
                ));
            };
            let pool = Arc::new(DatasetPool::load(path, Orientation::Auto)?);
            let rows = keep_rows(DATASET_ROWS.to_vec(), &args.policy, 4)?;
            let ns = horizons(args, &DATASET_HORIZONS);
            let mut cells = Vec::new();
            for row in &rows {
                let spec: PolicySpec = row.parse()?;
                for &n in &ns {
                    cells.push(make(spec.clone(), ArmSource::Dataset(pool.clone()), n));
                }
            }
            Ok(Plan {
                cells,
                bounds: Vec::new(),
                per_play: true,
                best_mean: Some(pool.best_mean()),
            })
        }
        Some(other) => Err(Failure::Usage(format!("no table {other}; pick 1, 2, 3 or 4"))),
        None => {
            if args.policy.is_empty() {
                return Err(Failure::Usage(
                    "nothing to run: pass --table or at least one --policy".into(),
                ));
            }
            if args.n.is_empty() {
                return Err(Failure::Usage("--n is required without --table".into()));
            }
            let source_for = |_n: u64| -> Result<ArmSource, Failure> {
                if let Some(path) = &args.dataset {
                    if args.prior.is_some() || args.reward.is_some() {
                        return Err(Failure::Usage(
                            "replay runs take rewards from the dataset; drop --prior/--reward"
                                .into(),
                        ));
                    }
                    let pool = Arc::new(DatasetPool::load(path, Orientation::Auto)?);
                    return Ok(ArmSource::Dataset(pool));
                }
                let Some(prior_text) = &args.prior else {
                    return Err(Failure::Usage("--prior is required without --table".into()));
                };
                let Some(reward_text) = &args.reward else {
                    return Err(Failure::Usage("--reward is required without --table".into()));
                };
                let prior: PriorModel = prior_text.parse()?;
                let reward: RewardModel = reward_text.parse()?;
                Ok(ArmSource::Synthetic { prior, reward })
            };
            // Load a dataset at most once and share it across cells.
            let shared = source_for(0)?;
            let mut cells = Vec::new();
            for text in &args.policy {
                let spec: PolicySpec = text.parse()?;
                for &n in &args.n {
                    cells.push(make(spec.clone(), shared.clone(), n));
                }
            }
            let best_mean = match &shared {
                ArmSource::Dataset(pool) => Some(pool.best_mean()),
                ArmSource::Synthetic { .. } => None,
            };
            let per_play = best_mean.is_some();
            Ok(Plan { cells, bounds: Vec::new(), per_play, best_mean })
        }
    }
}

fn horizons(args: &RunArgs, defaults: &[u64]) -> Vec<u64> {
    if args.n.is_empty() {
        defaults.to_vec()
    } else {
        args.n.clone()
    }
}

/// Applies --policy filters to a preset table: a filter keeps every row whose
/// name (the part before ':') matches, or exactly one row when the full spec
/// is spelled out. Unknown filters are errors.
fn keep_rows(
    rows: Vec<&'static str>,
    filters: &[String],
    table: u8,
) -> Result<Vec<&'static str>, Failure> {
    if filters.is_empty() {
        return Ok(rows);
    }
    let name = |spec: &str| spec.split(':').next().unwrap_or(spec).to_string();
    let mut kept = Vec::new();
    for filter in filters {
        let mut matched: Vec<&'static str> =
            rows.iter().copied().filter(|row| *row == filter).collect();
        if matched.is_empty() {
            matched = rows.iter().copied().filter(|row| name(row) == name(filter)).collect();
        }
        if matched.is_empty() {
            return Err(Failure::Usage(format!(
                "policy {filter:?} is not a row of table {table}; rows: {}",
                rows.join(", ")
            )));
        }
        for m in matched {
            if !kept.contains(&m) {
                kept.push(m);
            }
        }
    }
    // Preserve table order regardless of filter order.
    Ok(rows.into_iter().filter(|r| kept.contains(r)).collect())
}
