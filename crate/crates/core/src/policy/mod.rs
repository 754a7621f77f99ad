//! Decision rules and the textual specs that configure them.
//!
//! A policy sees the read-only [`GameState`] and picks the next [`Action`].
//! The engine then delivers the resulting reward back through
//! [`Policy::observe`], which is where event-driven rules (discard on a
//! failure, commit after a target is met) update their internal state.
//!
//! All indices are 1-based opening order, and every tie among arms breaks
//! toward the lowest index.

mod berry;
mod cbt;
mod epsilon;
mod two_target;
mod ucbf;

pub use berry::{FFailure, MLearning, NonRecallSRun, SRun};
pub use cbt::{confidence_bound, log_log_schedule, Cbt, EmpiricalCbt};
pub use epsilon::{EpsilonDecreasing, EpsilonFirst, EpsilonGreedy};
pub use two_target::TwoTarget;
pub use ucbf::{ExplorationSchedule, Ucbf};

use rand::RngCore;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::game::{Action, GameState};
use crate::prior::{asymptotic_constant, asymptotic_target, optimal_target, PriorModel};

/// A sequential decision rule.
pub trait Policy {
    /// Picks the next action. Randomized rules draw from `rng`; deterministic
    /// ones ignore it.
    fn choose(&mut self, game: &GameState, rng: &mut dyn RngCore) -> Result<Action, Error>;

    /// Feeds back the reward the chosen action produced. `game` already
    /// includes it. The default is a no-op for rules that read everything
    /// they need from the game itself.
    fn observe(&mut self, game: &GameState, arm: usize, reward: f64) -> Result<(), Error> {
        let _ = (game, arm, reward);
        Ok(())
    }
}

/// Rejects rewards outside {0, 1} for rules that count successes.
pub(crate) fn require_binary(reward: f64) -> Result<bool, Error> {
    if reward == 0.0 {
        Ok(false)
    } else if reward == 1.0 {
        Ok(true)
    } else {
        Err(Error::NonBinaryReward(reward))
    }
}

/// Floor with a hair of slack, so a powf result like 9.999999999999998 for a
/// quantity that is mathematically 10 still floors to 10.
fn floor_count(x: f64) -> u64 {
    (x + 1e-9).floor() as u64
}

/// Run length for run-based rules: floor(n^(1 / (beta + 1))), the number of
/// consecutive successes a horizon of n can afford to demand.
pub(crate) fn run_length_formula(beta: f64, n: u64) -> u64 {
    floor_count((n as f64).powf(1.0 / (beta + 1.0)))
}

/// Checkpoint pair for the two-checkpoint rule: the late target scales as
/// f * n^(1/(beta+1)) / C0 with C0 the unit-price regret constant, and the
/// early target is that base raised to (beta+1)/(beta+2).
pub(crate) fn checkpoint_formula(f: u32, alpha: f64, beta: f64, n: u64) -> (u64, u64) {
    let scale = (n as f64).powf(1.0 / (beta + 1.0)) / asymptotic_constant(alpha, beta, 1.0);
    let s1 = floor_count(scale.powf((beta + 1.0) / (beta + 2.0)));
    let sf = floor_count(f64::from(f) * scale);
    (s1, sf)
}

/// Pool size for finite-pool rules: floor((beta/alpha)^(1/(beta+1)) *
/// (n/(beta+1))^(beta/(beta+1))), of the same order as the count of arms an
/// optimal play opens.
pub(crate) fn pool_size_formula(alpha: f64, beta: f64, n: u64) -> u64 {
    floor_count(
        (beta / alpha).powf(1.0 / (beta + 1.0))
            * ((n as f64) / (beta + 1.0)).powf(beta / (beta + 1.0)),
    )
}

/// Index of the arm with the smallest sample mean, ties to the lowest index.
/// `None` when no arm has been pulled yet.
pub(crate) fn best_mean_arm(game: &GameState) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for arm in game.arms() {
        if arm.pulls == 0 {
            continue;
        }
        let mean = arm.sum / arm.pulls as f64;
        match best {
            Some((b, _)) if mean >= b => {}
            _ => best = Some((mean, arm.index)),
        }
    }
    best.map(|(_, index)| index)
}

/// How a threshold parameter is resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSpec {
    /// Root of v(z) = lambda / n for the configured prior.
    Auto,
    /// Large-horizon form C * n^(-1 / (beta + 1)).
    Asymptotic,
    Fixed(f64),
}

/// How a confidence-width parameter is resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleSpec {
    /// log log n, clamped below at 1.
    LogLog,
    Fixed(f64),
}

/// How an integer parameter is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountSpec {
    Auto,
    Fixed(u64),
}

/// A parseable, displayable policy configuration. The string form is
/// `name` or `name:key=value,key=value`, for example
/// `cbt:zeta=auto,b=loglog,c=loglog` or `two-target:f=3`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Cbt { zeta: TargetSpec, b: ScheduleSpec, c: ScheduleSpec },
    EmpiricalCbt { b: ScheduleSpec, c: ScheduleSpec },
    FFailure { f: u32 },
    SRun { s: CountSpec },
    NonRecallSRun { s: CountSpec },
    MLearning { m: CountSpec },
    TwoTarget { f: u32, s1: CountSpec, sf: CountSpec },
    Ucbf { k: CountSpec },
    EpsilonFirst { eps: f64, pool: CountSpec },
    EpsilonGreedy { eps: f64, pool: CountSpec },
    EpsilonDecreasing { eps: f64, pool: CountSpec },
}

/// Everything a [`PolicySpec`] may need to resolve its auto parameters.
#[derive(Debug, Clone, Default)]
pub struct BuildContext<'a> {
    pub n: u64,
    /// Prior behind synthetic arms; absent for dataset replay.
    pub prior: Option<&'a PriorModel>,
    /// Sampling price lambda; absent for dataset replay.
    pub lambda: Option<f64>,
    /// Candidate arm count for finite-pool rules; defaults to the
    /// pre-opened-arm formula when a prior is available.
    pub pool_arms: Option<u64>,
}

impl BuildContext<'_> {
    fn tail_params(&self, what: &str) -> Result<(f64, f64), Error> {
        match self.prior {
            Some(p) => Ok(p.tail_params()),
            None => Err(Error::Config(format!("{what} needs a prior to resolve"))),
        }
    }

    fn lambda(&self, what: &str) -> Result<f64, Error> {
        self.lambda
            .ok_or_else(|| Error::Config(format!("{what} needs a sampling price to resolve")))
    }
}

impl PolicySpec {
    /// Instantiates the rule, resolving every auto parameter against the
    /// context. Fails when a needed ingredient (prior, sampling price, pool
    /// size) is missing or a parameter is out of range.
    pub fn build(&self, ctx: &BuildContext<'_>) -> Result<Box<dyn Policy>, Error> {
        let n = ctx.n;
        if n == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        let nf = n as f64;
        match self {
            PolicySpec::Cbt { zeta, b, c } => {
                let zeta = match zeta {
                    TargetSpec::Fixed(z) => *z,
                    TargetSpec::Auto => {
                        let prior = ctx
                            .prior
                            .ok_or_else(|| Error::Config("cbt zeta=auto needs a prior".into()))?;
                        optimal_target(prior, ctx.lambda("cbt zeta=auto")?, n)?
                    }
                    TargetSpec::Asymptotic => {
                        let (alpha, beta) = ctx.tail_params("cbt zeta=asym")?;
                        asymptotic_target(alpha, beta, ctx.lambda("cbt zeta=asym")?, n)
                    }
                };
                Ok(Box::new(Cbt::new(zeta, b.resolve(n), c.resolve(n))?))
            }
            PolicySpec::EmpiricalCbt { b, c } => {
                Ok(Box::new(EmpiricalCbt::new(b.resolve(n), c.resolve(n))?))
            }
            PolicySpec::FFailure { f } => Ok(Box::new(FFailure::new(*f)?)),
            PolicySpec::SRun { s } => Ok(Box::new(SRun::new(s.resolve_runs(ctx)?)?)),
            PolicySpec::NonRecallSRun { s } => {
                Ok(Box::new(NonRecallSRun::new(s.resolve_runs(ctx)?)?))
            }
            PolicySpec::MLearning { m } => {
                let m = match m {
                    CountSpec::Fixed(m) => *m,
                    CountSpec::Auto => floor_count(nf.sqrt() * nf.ln()),
                };
                Ok(Box::new(MLearning::new(m)?))
            }
            PolicySpec::TwoTarget { f, s1, sf } => {
                let (s1, sf) = match (s1, sf) {
                    (CountSpec::Fixed(a), CountSpec::Fixed(b)) => (*a, *b),
                    _ => {
                        let (alpha, beta) = ctx.tail_params("two-target auto checkpoints")?;
                        let (auto_s1, auto_sf) = checkpoint_formula(*f, alpha, beta, n);
                        (
                            match s1 {
                                CountSpec::Fixed(a) => *a,
                                CountSpec::Auto => auto_s1,
                            },
                            match sf {
                                CountSpec::Fixed(b) => *b,
                                CountSpec::Auto => auto_sf,
                            },
                        )
                    }
                };
                Ok(Box::new(TwoTarget::new(*f, s1, sf)?))
            }
            PolicySpec::Ucbf { k } => {
                let k = match k {
                    CountSpec::Fixed(k) => *k,
                    CountSpec::Auto => {
                        let (alpha, beta) = ctx.tail_params("ucbf K=auto")?;
                        pool_size_formula(alpha, beta, n)
                    }
                };
                Ok(Box::new(Ucbf::new(k, ExplorationSchedule::SqrtLog)?))
            }
            PolicySpec::EpsilonFirst { eps, pool } => {
                Ok(Box::new(EpsilonFirst::new(*eps, pool.resolve_pool(ctx)?)?))
            }
            PolicySpec::EpsilonGreedy { eps, pool } => {
                Ok(Box::new(EpsilonGreedy::new(*eps, pool.resolve_pool(ctx)?)?))
            }
            PolicySpec::EpsilonDecreasing { eps, pool } => {
                Ok(Box::new(EpsilonDecreasing::new(*eps, pool.resolve_pool(ctx)?)?))
            }
        }
    }
}

impl ScheduleSpec {
    fn resolve(&self, n: u64) -> f64 {
        match self {
            ScheduleSpec::LogLog => log_log_schedule(n),
            ScheduleSpec::Fixed(x) => *x,
        }
    }
}

impl CountSpec {
    fn resolve_runs(&self, ctx: &BuildContext<'_>) -> Result<u64, Error> {
        match self {
            CountSpec::Fixed(s) => Ok(*s),
            CountSpec::Auto => {
                let (_, beta) = ctx.tail_params("s=auto")?;
                Ok(run_length_formula(beta, ctx.n))
            }
        }
    }

    /// Auto pool size: the dataset arm count when replaying, otherwise the
    /// same formula the index rule uses.
    fn resolve_pool(&self, ctx: &BuildContext<'_>) -> Result<u64, Error> {
        match self {
            CountSpec::Fixed(p) => Ok(*p),
            CountSpec::Auto => {
                if let Some(pool) = ctx.pool_arms {
                    return Ok(pool);
                }
                let (alpha, beta) = ctx.tail_params("pool=auto")?;
                Ok(pool_size_formula(alpha, beta, ctx.n))
            }
        }
    }
}

fn parse_kv(body: &str) -> Result<Vec<(String, String)>, Error> {
    let mut pairs = Vec::new();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {part:?}")))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, Error> {
    value.parse().map_err(|_| Error::Config(format!("{key} expects a number, got {value:?}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, Error> {
    value.parse().map_err(|_| Error::Config(format!("{key} expects an integer, got {value:?}")))
}

fn parse_count(key: &str, value: &str) -> Result<CountSpec, Error> {
    if value == "auto" {
        Ok(CountSpec::Auto)
    } else {
        Ok(CountSpec::Fixed(parse_u64(key, value)?))
    }
}

fn parse_eps(key: &str, value: &str) -> Result<f64, Error> {
    let eps = parse_f64(key, value)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("{key} must lie in (0, 1], got {eps}")));
    }
    Ok(eps)
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (name, body) = match s.split_once(':') {
            Some((name, body)) => (name.trim(), body),
            None => (s.trim(), ""),
        };
        let pairs = parse_kv(body)?;
        let reject_unknown = |allowed: &[&str]| -> Result<(), Error> {
            for (key, _) in &pairs {
                if !allowed.contains(&key.as_str()) {
                    return Err(Error::Config(format!("{name} does not take a {key:?} parameter")));
                }
            }
            Ok(())
        };
        let find = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());

        match name {
            "cbt" => {
                reject_unknown(&["zeta", "b", "c"])?;
                let zeta = match find("zeta") {
                    None | Some("auto") => TargetSpec::Auto,
                    Some("asym") => TargetSpec::Asymptotic,
                    Some(v) => TargetSpec::Fixed(parse_f64("zeta", v)?),
                };
                let b = match find("b") {
                    None | Some("loglog") => ScheduleSpec::LogLog,
                    Some(v) => ScheduleSpec::Fixed(parse_f64("b", v)?),
                };
                let c = match find("c") {
                    None | Some("loglog") => ScheduleSpec::LogLog,
                    Some(v) => ScheduleSpec::Fixed(parse_f64("c", v)?),
                };
                Ok(PolicySpec::Cbt { zeta, b, c })
            }
            "empirical-cbt" => {
                reject_unknown(&["b", "c"])?;
                let b = match find("b") {
                    None | Some("loglog") => ScheduleSpec::LogLog,
                    Some(v) => ScheduleSpec::Fixed(parse_f64("b", v)?),
                };
                let c = match find("c") {
                    None | Some("loglog") => ScheduleSpec::LogLog,
                    Some(v) => ScheduleSpec::Fixed(parse_f64("c", v)?),
                };
                Ok(PolicySpec::EmpiricalCbt { b, c })
            }
            "f-failure" => {
                reject_unknown(&["f"])?;
                let f = match find("f") {
                    None => 1,
                    Some(v) => parse_u64("f", v)? as u32,
                };
                Ok(PolicySpec::FFailure { f })
            }
            "s-run" | "nonrecall-s-run" => {
                reject_unknown(&["s"])?;
                let s = match find("s") {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("s", v)?,
                };
                if name == "s-run" {
                    Ok(PolicySpec::SRun { s })
                } else {
                    Ok(PolicySpec::NonRecallSRun { s })
                }
            }
            "m-learning" => {
                reject_unknown(&["m"])?;
                let m = match find("m") {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("m", v)?,
                };
                Ok(PolicySpec::MLearning { m })
            }
            "two-target" => {
                reject_unknown(&["f", "s1", "sf"])?;
                let f = match find("f") {
                    None => {
                        return Err(Error::Config("two-target needs f, e.g. two-target:f=3".into()))
                    }
                    Some(v) => parse_u64("f", v)? as u32,
                };
                let s1 = match find("s1") {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("s1", v)?,
                };
                let sf = match find("sf") {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("sf", v)?,
                };
                Ok(PolicySpec::TwoTarget { f, s1, sf })
            }
            "ucbf" => {
                reject_unknown(&["K", "k"])?;
                let k = match find("K").or_else(|| find("k")) {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("K", v)?,
                };
                Ok(PolicySpec::Ucbf { k })
            }
            "epsilon-first" | "epsilon-greedy" | "epsilon-decreasing" => {
                reject_unknown(&["eps", "pool"])?;
                let eps = match find("eps") {
                    None => {
                        return Err(Error::Config(format!("{name} needs eps, e.g. {name}:eps=0.1")))
                    }
                    Some(v) => parse_eps("eps", v)?,
                };
                let pool = match find("pool") {
                    None => CountSpec::Auto,
                    Some(v) => parse_count("pool", v)?,
                };
                Ok(match name {
                    "epsilon-first" => PolicySpec::EpsilonFirst { eps, pool },
                    "epsilon-greedy" => PolicySpec::EpsilonGreedy { eps, pool },
                    _ => PolicySpec::EpsilonDecreasing { eps, pool },
                })
            }
            other => Err(Error::Config(format!(
                "unknown policy {other:?}; known: cbt, empirical-cbt, f-failure, s-run, \
                 nonrecall-s-run, m-learning, two-target, ucbf, epsilon-first, epsilon-greedy, \
                 epsilon-decreasing"
            ))),
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Auto => write!(f, "auto"),
            TargetSpec::Asymptotic => write!(f, "asym"),
            TargetSpec::Fixed(z) => write!(f, "{z}"),
        }
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::LogLog => write!(f, "loglog"),
            ScheduleSpec::Fixed(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for CountSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountSpec::Auto => write!(f, "auto"),
            CountSpec::Fixed(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Cbt { zeta, b, c } => write!(out, "cbt:zeta={zeta},b={b},c={c}"),
            PolicySpec::EmpiricalCbt { b, c } => write!(out, "empirical-cbt:b={b},c={c}"),
            PolicySpec::FFailure { f } => write!(out, "f-failure:f={f}"),
            PolicySpec::SRun { s } => write!(out, "s-run:s={s}"),
            PolicySpec::NonRecallSRun { s } => write!(out, "nonrecall-s-run:s={s}"),
            PolicySpec::MLearning { m } => write!(out, "m-learning:m={m}"),
            PolicySpec::TwoTarget { f, s1, sf } => {
                write!(out, "two-target:f={f},s1={s1},sf={sf}")
            }
            PolicySpec::Ucbf { k } => write!(out, "ucbf:K={k}"),
            PolicySpec::EpsilonFirst { eps, pool } => {
                write!(out, "epsilon-first:eps={eps},pool={pool}")
            }
            PolicySpec::EpsilonGreedy { eps, pool } => {
                write!(out, "epsilon-greedy:eps={eps},pool={pool}")
            }
            PolicySpec::EpsilonDecreasing { eps, pool } => {
                write!(out, "epsilon-decreasing:eps={eps},pool={pool}")
            }
        }
    }
}
