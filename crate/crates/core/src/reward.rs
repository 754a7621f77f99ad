//! Reward families and dataset replay.
//!
//! A reward family turns an arm's mean cost mu into a distribution over
//! non-negative costs with that mean. Dataset replay is the odd one out: its
//! rewards come from recorded traces, not from a parametric draw.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::Error;

/// Picks probabilities over {0, 1, ..., support} with a prescribed mean.
#[derive(Clone)]
pub struct DiscreteBuilder {
    support: u32,
    build: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl DiscreteBuilder {
    /// All mass on 0 and the support cap: P(X = support) = mu / support.
    pub fn two_point(support: u32) -> Self {
        assert!(support >= 1, "support cap must be at least 1");
        let cap = f64::from(support);
        DiscreteBuilder {
            support,
            build: Arc::new(move |mu| {
                let hi = mu / cap;
                let mut probs = vec![0.0; support as usize + 1];
                probs[0] = 1.0 - hi;
                probs[support as usize] = hi;
                probs
            }),
        }
    }

    /// A caller-supplied rule; it must return support + 1 probabilities that
    /// are non-negative, sum to 1, and have mean mu.
    pub fn with_rule<F>(support: u32, rule: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        DiscreteBuilder { support, build: Arc::new(rule) }
    }

    pub fn support(&self) -> u32 {
        self.support
    }

    fn pmf(&self, mu: f64) -> Result<Vec<f64>, Error> {
        let probs = (self.build)(mu);
        if probs.len() != self.support as usize + 1 {
            return Err(Error::Config(format!(
                "discrete rule returned {} probabilities, expected {}",
                probs.len(),
                self.support + 1
            )));
        }
        let mut total = 0.0;
        for &p in &probs {
            if !(p >= -1e-12) {
                return Err(Error::Config(format!("discrete rule produced probability {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("discrete rule probabilities sum to {total}")));
        }
        Ok(probs)
    }
}

impl fmt::Debug for DiscreteBuilder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteBuilder").field("support", &self.support).finish()
    }
}

impl std::str::FromStr for RewardModel {
    type Err = Error;

    /// Accepts `bernoulli`, `poisson`, `scaled-exponential`, `scaled-uniform`
    /// and `two-point:support=S`. Replay is implied by a dataset source and
    /// custom discrete families are library-only, so neither parses.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "bernoulli" => Ok(RewardModel::Bernoulli),
            "poisson" => Ok(RewardModel::Poisson),
            "scaled-exponential" => Ok(RewardModel::ScaledContinuous(ScaleBase::Exponential)),
            "scaled-uniform" => Ok(RewardModel::ScaledContinuous(ScaleBase::Uniform)),
            other => {
                if let Some(body) = other.strip_prefix("two-point:support=") {
                    let support: u32 = body.trim().parse().map_err(|_| {
                        Error::Config(format!("support expects an integer, got {body:?}"))
                    })?;
                    if support == 0 {
                        return Err(Error::Config("support must be at least 1".into()));
                    }
                    return Ok(RewardModel::BoundedDiscrete(DiscreteBuilder::two_point(support)));
                }
                Err(Error::Config(format!(
                    "unknown reward family {other:?}; known: bernoulli, poisson, \
                     scaled-exponential, scaled-uniform, two-point:support=S"
                )))
            }
        }
    }
}

/// Shape of the unit-mean factor Z in a scaled-continuous reward X = mu * Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleBase {
    /// Exponential with mean 1.
    Exponential,
    /// Uniform on (0, 2), mean 1.
    Uniform,
}

/// How rewards are generated for an arm with mean cost mu.
#[derive(Debug, Clone)]
pub enum RewardModel {
    /// Cost 1 with probability mu, else 0. Requires mu in [0, 1].
    Bernoulli,
    /// Poisson counts with mean mu.
    Poisson,
    /// Bounded integer costs from a [`DiscreteBuilder`].
    BoundedDiscrete(DiscreteBuilder),
    /// X = mu * Z for a continuous unit-mean Z.
    ScaledContinuous(ScaleBase),
    /// Rewards replayed from recorded traces; draws happen through
    /// [`DatasetPool::replay`], never through [`RewardModel::draw`].
    DatasetReplay,
}

impl RewardModel {
    /// One reward from an arm with mean cost mu.
    pub fn draw<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> Result<f64, Error> {
        if !(mu >= 0.0) {
            return Err(Error::Config(format!("arm mean {mu} is outside the family's range")));
        }
        match self {
            RewardModel::Bernoulli => {
                if mu > 1.0 {
                    return Err(Error::Config(format!(
                        "arm mean {mu} is outside [0, 1] required for binary costs"
                    )));
                }
                Ok(if rng.gen::<f64>() < mu { 1.0 } else { 0.0 })
            }
            RewardModel::Poisson => {
                if mu == 0.0 {
                    return Ok(0.0);
                }
                let dist = Poisson::new(mu)
                    .map_err(|e| Error::Config(format!("poisson mean {mu}: {e}")))?;
                Ok(dist.sample(rng))
            }
            RewardModel::BoundedDiscrete(builder) => {
                let probs = builder.pmf(mu)?;
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (value, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return Ok(value as f64);
                    }
                }
                Ok((probs.len() - 1) as f64)
            }
            RewardModel::ScaledContinuous(base) => {
                let z = match base {
                    ScaleBase::Exponential => Exp::new(1.0).unwrap().sample(rng),
                    ScaleBase::Uniform => rng.gen::<f64>() * 2.0,
                };
                Ok(mu * z)
            }
            RewardModel::DatasetReplay => Err(Error::Config(
                "replay rewards come from a dataset pool, not a parametric draw".into(),
            )),
        }
    }

    /// Mean of one draw given it is positive, as a function of mu. This is
    /// the integrand of the sampling price lambda. NaN or non-finite output
    /// signals a family where the quantity is unavailable.
    pub(crate) fn conditional_mean_positive(&self, mu: f64) -> f64 {
        // Families with an atom at zero have a 0/0 limit at mu = 0; evaluate
        // just inside instead.
        let mu = mu.max(1e-12);
        match self {
            RewardModel::Bernoulli => 1.0,
            RewardModel::Poisson => mu / (-f64::exp_m1(-mu)),
            RewardModel::BoundedDiscrete(builder) => match builder.pmf(mu) {
                Ok(probs) => {
                    let positive = 1.0 - probs[0];
                    if positive <= 0.0 {
                        f64::NAN
                    } else {
                        mu / positive
                    }
                }
                Err(_) => f64::NAN,
            },
            RewardModel::ScaledContinuous(_) => mu,
            RewardModel::DatasetReplay => f64::NAN,
        }
    }
}

/// Which way a dataset file is laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Arms along the smaller dimension: columns when the file has at least
    /// as many rows as columns, rows otherwise.
    #[default]
    Auto,
    ArmsInColumns,
    ArmsInRows,
}

/// Recorded cost traces, one per arm, with their full-trace means.
#[derive(Debug, Clone)]
pub struct DatasetPool {
    arms: Vec<Vec<f64>>,
    means: Vec<f64>,
}

impl DatasetPool {
    /// Parses a numeric table from `path`. Fields are separated by commas or
    /// whitespace; blank lines are skipped; every row must have the same
    /// width. Values are costs and must be non-negative.
    pub fn load(path: &Path, orientation: Orientation) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = 0usize;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = if trimmed.contains(',') {
                trimmed.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
            } else {
                trimmed.split_whitespace().collect()
            };
            let mut row = Vec::with_capacity(fields.len());
            for field in fields {
                let value: f64 = field.parse().map_err(|_| Error::DatasetParse {
                    line: line_no,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                if !(value >= 0.0) {
                    return Err(Error::DatasetParse {
                        line: line_no,
                        message: format!("negative cost {value}"),
                    });
                }
                row.push(value);
            }
            if rows.is_empty() {
                width = row.len();
            } else if row.len() != width {
                return Err(Error::DatasetParse {
                    line: line_no,
                    message: format!("row has {} fields, expected {width}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.is_empty() || width == 0 {
            return Err(Error::Config(format!("dataset {} holds no samples", path.display())));
        }

        let arms_in_columns = match orientation {
            Orientation::ArmsInColumns => true,
            Orientation::ArmsInRows => false,
            Orientation::Auto => rows.len() >= width,
        };
        let arms: Vec<Vec<f64>> = if arms_in_columns {
            (0..width).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
        } else {
            rows
        };
        Self::from_traces(arms)
    }

    /// Builds a pool directly from per-arm traces.
    pub fn from_traces(arms: Vec<Vec<f64>>) -> Result<Self, Error> {
        if arms.is_empty() {
            return Err(Error::Config("dataset holds no arms".into()));
        }
        let mut means = Vec::with_capacity(arms.len());
        for (i, trace) in arms.iter().enumerate() {
            if trace.is_empty() {
                return Err(Error::EmptyArm { arm: i + 1 });
            }
            if let Some(&bad) = trace.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::NegativeReward(bad));
            }
            means.push(trace.iter().sum::<f64>() / trace.len() as f64);
        }
        Ok(DatasetPool { arms, means })
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    /// Full trace of arm `idx` (0-based pool position).
    pub fn trace(&self, idx: usize) -> &[f64] {
        &self.arms[idx]
    }

    /// Full-trace mean of arm `idx`.
    pub fn mean(&self, idx: usize) -> f64 {
        self.means[idx]
    }

    /// Smallest full-trace mean in the pool.
    pub fn best_mean(&self) -> f64 {
        self.means.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Starts a replay of arm `idx`: its samples in a fresh uniform random
    /// order, each yielded once.
    pub fn replay<R: Rng + ?Sized>(&self, idx: usize, rng: &mut R) -> ReplayStream {
        let mut values = self.arms[idx].clone();
        values.shuffle(rng);
        ReplayStream { values, pos: 0, arm: idx + 1 }
    }
}

/// One run's pass through a single arm's recorded samples.
#[derive(Debug, Clone)]
pub struct ReplayStream {
    values: Vec<f64>,
    pos: usize,
    arm: usize,
}

impl ReplayStream {
    /// The next recorded cost; an error once the trace is spent.
    pub fn next_reward(&mut self) -> Result<f64, Error> {
        if self.pos >= self.values.len() {
            return Err(Error::TraceExhausted { arm: self.arm, len: self.values.len() });
        }
        let value = self.values[self.pos];
        self.pos += 1;
        Ok(value)
    }

    pub fn remaining(&self) -> usize {
        self.values.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn reward_families_parse_from_text() {
        assert!(matches!("bernoulli".parse::<RewardModel>().unwrap(), RewardModel::Bernoulli));
        assert!(matches!("poisson".parse::<RewardModel>().unwrap(), RewardModel::Poisson));
        assert!(matches!(
            "scaled-exponential".parse::<RewardModel>().unwrap(),
            RewardModel::ScaledContinuous(ScaleBase::Exponential)
        ));
        assert!(matches!(
            "scaled-uniform".parse::<RewardModel>().unwrap(),
            RewardModel::ScaledContinuous(ScaleBase::Uniform)
        ));
        match "two-point:support=3".parse::<RewardModel>().unwrap() {
            RewardModel::BoundedDiscrete(builder) => assert_eq!(builder.support(), 3),
            other => panic!("expected a discrete family, got {other:?}"),
        }
        assert!("two-point:support=0".parse::<RewardModel>().is_err());
        assert!("gaussian".parse::<RewardModel>().is_err());
        assert!("dataset".parse::<RewardModel>().is_err());
    }

    #[test]
    fn bernoulli_is_binary_with_matching_mean() {
        let model = RewardModel::Bernoulli;
        let mut r = rng(1);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = model.draw(0.3, &mut r).unwrap();
            assert!(x == 0.0 || x == 1.0);
            sum += x;
        }
        let mean = sum / n as f64;
        // 4 sigma for p = 0.3 at 1e5 draws.
        assert!((mean - 0.3).abs() < 0.006, "mean {mean}");
    }

    #[test]
    fn bernoulli_rejects_mean_above_one() {
        let mut r = rng(2);
        assert!(RewardModel::Bernoulli.draw(1.2, &mut r).is_err());
        assert!(RewardModel::Bernoulli.draw(-0.1, &mut r).is_err());
    }

    #[test]
    fn poisson_mean_tracks_mu() {
        let model = RewardModel::Poisson;
        let mut r = rng(3);
        let n = 20_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += model.draw(2.5, &mut r).unwrap();
        }
        let mean = sum / n as f64;
        // 4 sigma: sd = sqrt(2.5 / 2e4).
        assert!((mean - 2.5).abs() < 0.045, "mean {mean}");
        assert_eq!(model.draw(0.0, &mut r).unwrap(), 0.0);
    }

    #[test]
    fn two_point_support_and_mean() {
        let model = RewardModel::BoundedDiscrete(DiscreteBuilder::two_point(4));
        let mut r = rng(4);
        let n = 50_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = model.draw(1.0, &mut r).unwrap();
            assert!(x == 0.0 || x == 4.0);
            sum += x;
        }
        let mean = sum / n as f64;
        // mean 1.0, var = 4 - 1 = 3, 4 sigma at 5e4 draws.
        assert!((mean - 1.0).abs() < 0.031, "mean {mean}");
    }

    #[test]
    fn malformed_discrete_rule_is_rejected() {
        let bad_len = RewardModel::BoundedDiscrete(DiscreteBuilder::with_rule(2, |_| vec![1.0]));
        assert!(bad_len.draw(0.5, &mut rng(5)).is_err());
        let bad_sum =
            RewardModel::BoundedDiscrete(DiscreteBuilder::with_rule(1, |_| vec![0.7, 0.7]));
        assert!(bad_sum.draw(0.5, &mut rng(6)).is_err());
        let negative =
            RewardModel::BoundedDiscrete(DiscreteBuilder::with_rule(1, |_| vec![1.5, -0.5]));
        assert!(negative.draw(0.5, &mut rng(7)).is_err());
    }

    #[test]
    fn scaled_continuous_scales_the_mean() {
        for base in [ScaleBase::Exponential, ScaleBase::Uniform] {
            let model = RewardModel::ScaledContinuous(base);
            let mut r = rng(8);
            let n = 50_000;
            let mut sum = 0.0;
            for _ in 0..n {
                let x = model.draw(0.4, &mut r).unwrap();
                assert!(x >= 0.0);
                sum += x;
            }
            let mean = sum / n as f64;
            assert!((mean - 0.4).abs() < 0.01, "{base:?} mean {mean}");
            assert_eq!(model.draw(0.0, &mut r).unwrap(), 0.0);
        }
    }

    #[test]
    fn replay_model_has_no_parametric_draw() {
        assert!(RewardModel::DatasetReplay.draw(0.5, &mut rng(9)).is_err());
    }

    #[test]
    fn conditional_mean_positive_values() {
        let pois = RewardModel::Poisson;
        let want = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((pois.conditional_mean_positive(1.0) - want).abs() < 1e-12);
        assert!((pois.conditional_mean_positive(0.0) - 1.0).abs() < 1e-9);
        let two = RewardModel::BoundedDiscrete(DiscreteBuilder::two_point(3));
        assert!((two.conditional_mean_positive(0.5) - 3.0).abs() < 1e-9);
        assert!((RewardModel::Bernoulli.conditional_mean_positive(0.7) - 1.0).abs() == 0.0);
        assert!(
            (RewardModel::ScaledContinuous(ScaleBase::Exponential).conditional_mean_positive(0.7)
                - 0.7)
                .abs()
                < 1e-12
        );
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_auto_picks_columns_when_tall() {
        let f = write_temp("1 10 100\n2 20 200\n3 30 300\n4 40 400\n");
        let pool = DatasetPool::load(f.path(), Orientation::Auto).unwrap();
        assert_eq!(pool.arm_count(), 3);
        assert_eq!(pool.trace(0), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(pool.mean(1), 25.0);
        assert_eq!(pool.best_mean(), 2.5);
    }

    #[test]
    fn load_auto_picks_rows_when_wide() {
        let f = write_temp("1, 2, 3, 4\n10, 20, 30, 40\n");
        let pool = DatasetPool::load(f.path(), Orientation::Auto).unwrap();
        assert_eq!(pool.arm_count(), 2);
        assert_eq!(pool.trace(1), &[10.0, 20.0, 30.0, 40.0]);
    }

    #[test]
    fn orientation_override_wins() {
        let f = write_temp("1 10\n2 20\n3 30\n");
        let pool = DatasetPool::load(f.path(), Orientation::ArmsInRows).unwrap();
        assert_eq!(pool.arm_count(), 3);
        assert_eq!(pool.trace(0), &[1.0, 10.0]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let f = write_temp("1 2\n1 oops\n");
        match DatasetPool::load(f.path(), Orientation::Auto) {
            Err(Error::DatasetParse { line: 2, .. }) => {}
            other => panic!("expected a parse error on line 2, got {other:?}"),
        }
        let ragged = write_temp("1 2\n3\n");
        match DatasetPool::load(ragged.path(), Orientation::Auto) {
            Err(Error::DatasetParse { line: 2, .. }) => {}
            other => panic!("expected a width error on line 2, got {other:?}"),
        }
        let negative = write_temp("1 2\n3 -4\n");
        match DatasetPool::load(negative.path(), Orientation::Auto) {
            Err(Error::DatasetParse { line: 2, .. }) => {}
            other => panic!("expected a negative-cost error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let f = write_temp("\n\n");
        assert!(matches!(DatasetPool::load(f.path(), Orientation::Auto), Err(Error::Config(_))));
        assert!(matches!(
            DatasetPool::from_traces(vec![vec![1.0], vec![]]),
            Err(Error::EmptyArm { arm: 2 })
        ));
    }

    #[test]
    fn replay_permutes_without_replacement() {
        let pool = DatasetPool::from_traces(vec![(1..=10).map(f64::from).collect()]).unwrap();
        let mut stream = pool.replay(0, &mut rng(10));
        let mut seen = Vec::new();
        for _ in 0..10 {
            seen.push(stream.next_reward().unwrap());
        }
        assert!(matches!(stream.next_reward(), Err(Error::TraceExhausted { arm: 1, len: 10 })));
        let mut sorted = seen.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, (1..=10).map(f64::from).collect::<Vec<_>>());
        // A different run sees a different order (for these seeds).
        let mut other = pool.replay(0, &mut rng(11));
        let second: Vec<f64> = (0..10).map(|_| other.next_reward().unwrap()).collect();
        assert_ne!(seen, second);
    }
}
