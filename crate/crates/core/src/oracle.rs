//! Independent cross-checks for the simulator: brute-force samplers for two
//! idealized searches that see true arm means directly, the exact distribution
//! of the adaptive search's stop index, a closed-form regret series, and a
//! Monte Carlo tail estimator for the confidence-bound stopping times. Nothing
//! here goes through the policy engine, so the two sides can disagree.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::kahan_sum;
use crate::error::Error;
use crate::prior::PriorModel;
use crate::reward::RewardModel;

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub replications: u64,
}

/// Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub probability: f64,
    pub standard_error: f64,
    pub replications: u64,
}

/// One run of an idealized search that pays `lambda` per arm inspected and
/// then sinks the whole horizon into the arm it settles on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealizedOutcome {
    /// Arms inspected, the accepted one included.
    pub arms_tried: u64,
    /// True mean of the arm the search settles on.
    pub settled_mean: f64,
    /// lambda * arms_tried + n * settled_mean.
    pub regret: f64,
}

fn check_price_and_horizon(lambda: f64, n: u64) -> Result<(), Error> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Config(format!("sampling price must be positive, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    Ok(())
}

fn check_replications(replications: u64) -> Result<(), Error> {
    if replications == 0 {
        return Err(Error::Config("at least one replication is required".into()));
    }
    Ok(())
}

fn summarize(values: &[f64]) -> MeanEstimate {
    let r = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / r;
    let standard_error = if values.len() < 2 {
        0.0
    } else {
        let variance = kahan_sum(values.iter().map(|v| (v - mean).powi(2))) / (r - 1.0);
        (variance / r).sqrt()
    };
    MeanEstimate { mean, standard_error, replications: values.len() as u64 }
}

/// One run of the fixed-target search: draw fresh arm means from the prior
/// until one lands at or below `target`, then charge the whole horizon to it.
pub fn idealized_fixed_target_sample<R: Rng + ?Sized>(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    target: f64,
    rng: &mut R,
) -> Result<IdealizedOutcome, Error> {
    check_price_and_horizon(lambda, n)?;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Config(format!("target must be positive, got {target}")));
    }
    if prior.cdf(target) <= 0.0 {
        return Err(Error::Config(format!("target {target} carries no prior mass")));
    }
    let mut tried = 0u64;
    loop {
        tried += 1;
        let mu = prior.sample(rng);
        if mu <= target {
            debug_assert!(mu <= target);
            return Ok(IdealizedOutcome {
                arms_tried: tried,
                settled_mean: mu,
                regret: lambda * tried as f64 + n as f64 * mu,
            });
        }
    }
}

/// Monte Carlo mean regret of the fixed-target search. Replication r is seeded
/// with `base_seed + r`, the same contract as the engine, so estimates are
/// reproducible and extending the replication count keeps the prefix.
pub fn idealized_fixed_target_regret(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    target: f64,
    replications: u64,
    base_seed: u64,
) -> Result<MeanEstimate, Error> {
    check_replications(replications)?;
    let regrets = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r));
            idealized_fixed_target_sample(prior, lambda, n, target, &mut rng).map(|o| o.regret)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    Ok(summarize(&regrets))
}

/// One run of the rising-target search: after k draws the acceptance threshold
/// is k * lambda / n, and the search stops as soon as the running minimum of
/// the drawn means falls to the threshold. The minimum is what gets played.
pub fn idealized_rising_target_sample<R: Rng + ?Sized>(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    rng: &mut R,
) -> Result<IdealizedOutcome, Error> {
    check_price_and_horizon(lambda, n)?;
    let step = lambda / n as f64;
    let mut best = f64::INFINITY;
    let mut tried = 0u64;
    loop {
        tried += 1;
        best = best.min(prior.sample(rng));
        if best <= step * tried as f64 {
            debug_assert!(best <= step * tried as f64);
            return Ok(IdealizedOutcome {
                arms_tried: tried,
                settled_mean: best,
                regret: lambda * tried as f64 + n as f64 * best,
            });
        }
    }
}

/// Monte Carlo mean regret of the rising-target search, seeded per
/// replication like [`idealized_fixed_target_regret`].
pub fn idealized_rising_target_regret(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    replications: u64,
    base_seed: u64,
) -> Result<MeanEstimate, Error> {
    check_replications(replications)?;
    let regrets = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r));
            idealized_rising_target_sample(prior, lambda, n, &mut rng).map(|o| o.regret)
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    Ok(summarize(&regrets))
}

const PMF_MAX_TERMS: usize = 10_000_000;

/// Exact distribution of the rising-target search's stop index: entry k-1
/// holds P(the search stops at the k-th arm). The search stops at arm k when
/// either the threshold k*lambda/n rose past the old running minimum or the
/// k-th draw itself landed below the threshold; the two events are disjoint
/// and their probabilities are accumulated term by term. The vector ends where
/// the survival probability hits zero, so it sums to one.
pub fn stop_index_pmf(prior: &PriorModel, lambda: f64, n: u64) -> Result<Vec<f64>, Error> {
    check_price_and_horizon(lambda, n)?;
    let step = lambda / n as f64;
    let mut pmf = Vec::new();
    let mut prev_q = 1.0f64;
    for k in 1..=PMF_MAX_TERMS {
        let p = prior.cdf(step * k as f64);
        let q = (1.0 - p).max(0.0);
        let old_floor = prev_q.powi(k as i32 - 1);
        let new_floor = q.powi(k as i32 - 1);
        let overtaken = old_floor - new_floor;
        let fresh_hit = new_floor * p;
        pmf.push(overtaken + fresh_hit);
        if q * new_floor == 0.0 {
            return Ok(pmf);
        }
        prev_q = q;
    }
    Err(Error::TailTruncated { k_max: PMF_MAX_TERMS as u64 })
}

pub(crate) fn series_summand(alpha: f64, beta: f64, lambda: f64, n: u64, k: u64) -> f64 {
    let nf = n as f64;
    let power = (k as f64).powf(beta + 1.0) / nf.powf(beta);
    let decay = alpha * lambda.powf(beta) / beta;
    let weight = alpha * lambda.powf(beta + 1.0) / beta;
    let shape = 2.0 * beta + 2.0 - 1.0 / (beta + 1.0);
    (-decay * power).exp() * weight * power * shape
}

/// Closed-form regret series for a prior with tail density alpha * mu^(beta-1)
/// near zero. Sums positive terms until the running term drops below 1e-12 of
/// the partial sum on the decaying side; if that never happens within `k_max`
/// terms the truncation is unsafe and the call fails rather than returning a
/// silently short sum. The ratio of the sum to the benchmark level
/// C * I_beta * n^(beta/(beta+1)) tends to one as n grows.
pub fn regret_series(alpha: f64, beta: f64, lambda: f64, n: u64, k_max: u64) -> Result<f64, Error> {
    if !(alpha > 0.0) || !alpha.is_finite() || !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Config(format!(
            "tail parameters must be positive, got alpha={alpha}, beta={beta}"
        )));
    }
    check_price_and_horizon(lambda, n)?;
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let mut sum = 0.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..=k_max {
        let term = series_summand(alpha, beta, lambda, n, k);
        sum += term;
        if term < prev && term <= 1e-12 * sum {
            return Ok(sum);
        }
        prev = term;
    }
    Err(Error::TailTruncated { k_max })
}

/// Monte Carlo estimate of the probability that an arm with true mean `mu` is
/// rejected within `horizon` pulls by either stopping rule: the plain-rate
/// rule fires when the reward sum exceeds b * t * target, the deviation rule
/// when it exceeds t * target + c * sd_t * sqrt(t), with sd_t the biased
/// within-arm standard deviation after t pulls.
#[allow(clippy::too_many_arguments)]
pub fn stopping_tail_estimate(
    reward: &RewardModel,
    mu: f64,
    target: f64,
    b: f64,
    c: f64,
    horizon: u64,
    replications: u64,
    base_seed: u64,
) -> Result<TailEstimate, Error> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Config(format!("arm mean must be non-negative, got {mu}")));
    }
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Config(format!("target must be positive, got {target}")));
    }
    if !(b > 0.0) || !b.is_finite() || !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Config(format!(
            "widths must satisfy b > 0 and c >= 0, got b={b}, c={c}"
        )));
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    check_replications(replications)?;

    let stops = (0..replications)
        .into_par_iter()
        .map(|r| -> Result<u64, Error> {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r));
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for t in 1..=horizon {
                let x = reward.draw(mu, &mut rng)?;
                sum += x;
                sum_sq += x * x;
                let tf = t as f64;
                if sum > b * tf * target {
                    return Ok(1);
                }
                // S > t*target + c*sd*sqrt(t), squared to skip the sqrt:
                // sd^2 * t = sum_sq - sum^2 / t, clamped against rounding.
                let excess = sum - tf * target;
                if excess > 0.0 && excess * excess > c * c * (sum_sq - sum * sum / tf).max(0.0) {
                    return Ok(1);
                }
            }
            Ok(0)
        })
        .collect::<Result<Vec<u64>, Error>>()?;

    let stopped: u64 = stops.iter().sum();
    let p = stopped as f64 / replications as f64;
    let standard_error = (p * (1.0 - p) / replications as f64).sqrt();
    Ok(TailEstimate { probability: p, standard_error, replications })
}

/// Outcome of a goodness-of-fit comparison between simulated stop indices
/// and their exact distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    /// Upper 0.1% point of the reference chi-square distribution.
    pub critical: f64,
    /// Cells after merging sparse neighbours, so expected counts stay >= 5.
    pub cells: usize,
}

impl ChiSquareReport {
    pub fn passed(&self) -> bool {
        self.statistic < self.critical
    }
}

/// Simulates `replications` stop indices of the rising-target search and
/// tests them against [`stop_index_pmf`] with a chi-square statistic at the
/// 0.001 level. Adjacent indices are pooled until every cell expects at
/// least 5 observations.
pub fn stop_index_chi_square(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    replications: u64,
    base_seed: u64,
) -> Result<ChiSquareReport, Error> {
    check_replications(replications)?;
    let pmf = stop_index_pmf(prior, lambda, n)?;
    let indices = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(r));
            idealized_rising_target_sample(prior, lambda, n, &mut rng).map(|o| o.arms_tried)
        })
        .collect::<Result<Vec<u64>, Error>>()?;
    let mut counts = vec![0u64; pmf.len()];
    for k in indices {
        let i = (k as usize - 1).min(counts.len() - 1);
        counts[i] += 1;
    }

    let mut cells: Vec<(f64, u64)> = Vec::new();
    let (mut expected, mut observed) = (0.0f64, 0u64);
    for (i, &mass) in pmf.iter().enumerate() {
        expected += mass * replications as f64;
        observed += counts[i];
        if expected >= 5.0 {
            cells.push((expected, observed));
            expected = 0.0;
            observed = 0;
        }
    }
    if expected > 0.0 || observed > 0 {
        let (e, o) = cells.pop().unwrap_or((0.0, 0));
        cells.push((e + expected, o + observed));
    }
    if cells.len() < 2 {
        return Err(Error::Config(format!(
            "only {} cell(s) after pooling; not enough replications for a fit test",
            cells.len()
        )));
    }

    let statistic = cells
        .iter()
        .map(|&(e, o)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let reference = statrs::distribution::ChiSquared::new((cells.len() - 1) as f64)
        .map_err(|e| Error::Config(format!("chi-square reference: {e}")))?;
    use statrs::distribution::ContinuousCDF;
    let critical = reference.inverse_cdf(0.999);
    Ok(ChiSquareReport { statistic, critical, cells: cells.len() })
}

/// Scans the fixed-target regret curve over an evenly spaced grid of `points`
/// thresholds in (0, cap] and returns the smallest grid value minus the value
/// at the optimizing threshold. A correct optimizer makes this non-negative up
/// to rounding.
pub fn threshold_regret_grid_gap(
    prior: &PriorModel,
    lambda: f64,
    n: u64,
    points: u64,
) -> Result<f64, Error> {
    if points == 0 {
        return Err(Error::Config("grid needs at least one point".into()));
    }
    let zeta = crate::prior::optimal_target(prior, lambda, n)?;
    let floor_value = crate::prior::threshold_regret(prior, lambda, n, zeta)?;
    let cap = prior.support_max();
    let mut best = f64::INFINITY;
    for i in 1..=points {
        let z = cap * i as f64 / points as f64;
        let r = crate::prior::threshold_regret(prior, lambda, n, z)?;
        if r < best {
            best = r;
        }
    }
    Ok(best - floor_value)
}
