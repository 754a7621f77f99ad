//! Priors over arm mean costs and the constants they induce.
//!
//! Every prior lives on a bounded interval (0, cap) and behaves like
//! alpha * mu^(beta - 1) near zero. The pair (alpha, beta) controls how much
//! mass sits near free arms, and with it the achievable regret: no strategy
//! beats C * n^(beta / (beta + 1)) up to a constant factor, where C depends
//! on (alpha, beta) and the sampling price lambda.
//!
//! Two integral transforms of the density g drive everything here:
//! the mass below a threshold, p(z) = P(mu <= z), and the expected
//! shortfall v(z) = E(z - mu)^+. The threshold worth playing to at horizon n
//! solves v(z) = lambda / n.

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::error::Error;
use crate::quad;
use crate::reward::RewardModel;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Bisection stops once the shortfall matches the demand to this relative
/// tolerance.
const TARGET_REL_TOL: f64 = 1e-12;

/// A prior density over arm mean costs.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorModel {
    /// Uniform on (0, 1): alpha = 1, beta = 1.
    Uniform01,
    /// Density (pi/2) sin(pi mu) on (0, 1): alpha = pi^2/2, beta = 2.
    Sin,
    /// Density 1 - cos(pi mu) on (0, 1): alpha = pi^2/2, beta = 3.
    OneMinusCos,
    /// Density alpha * mu^(beta - 1) on (0, cap). Normalization requires
    /// alpha * cap^beta = beta; construct through [`PriorModel::power_law`].
    PowerLaw { alpha: f64, beta: f64, cap: f64 },
}

impl PriorModel {
    /// A power-law prior, validated to integrate to 1 over (0, cap).
    pub fn power_law(alpha: f64, beta: f64, cap: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) || !(beta > 0.0) || !(cap > 0.0) {
            return Err(Error::Config(format!(
                "power-law parameters must be positive, got alpha {alpha}, beta {beta}, cap {cap}"
            )));
        }
        let total = alpha * cap.powf(beta) / beta;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "power-law density integrates to {total} over (0, {cap}), not 1"
            )));
        }
        Ok(PriorModel::PowerLaw { alpha, beta, cap })
    }

    /// The density g at mu; zero outside the support.
    pub fn density(&self, mu: f64) -> f64 {
        if mu < 0.0 || mu > self.support_max() {
            return 0.0;
        }
        match self {
            PriorModel::Uniform01 => 1.0,
            PriorModel::Sin => 0.5 * PI * (PI * mu).sin(),
            PriorModel::OneMinusCos => 1.0 - (PI * mu).cos(),
            PriorModel::PowerLaw { alpha, beta, .. } => alpha * mu.powf(beta - 1.0),
        }
    }

    /// Mass below a threshold: p(z) = P(mu <= z).
    pub fn cdf(&self, z: f64) -> f64 {
        let cap = self.support_max();
        if z <= 0.0 {
            return 0.0;
        }
        if z >= cap {
            return 1.0;
        }
        match self {
            PriorModel::Uniform01 => z,
            PriorModel::Sin => 0.5 * (1.0 - (PI * z).cos()),
            PriorModel::OneMinusCos => z - (PI * z).sin() / PI,
            PriorModel::PowerLaw { alpha, beta, .. } => alpha / beta * z.powf(*beta),
        }
    }

    /// Expected shortfall v(z) = E(z - mu)^+; its derivative in z is the cdf.
    pub fn expected_shortfall(&self, z: f64) -> f64 {
        let cap = self.support_max();
        if z <= 0.0 {
            return 0.0;
        }
        if z >= cap {
            // All mass is below z, so the shortfall is linear from here on.
            return z - self.mean();
        }
        match self {
            PriorModel::Uniform01 => 0.5 * z * z,
            PriorModel::Sin => 0.5 * z - (PI * z).sin() / (2.0 * PI),
            PriorModel::OneMinusCos => 0.5 * z * z + ((PI * z).cos() - 1.0) / (PI * PI),
            PriorModel::PowerLaw { alpha, beta, .. } => {
                alpha / (beta * (beta + 1.0)) * z.powf(beta + 1.0)
            }
        }
    }

    /// Mean of the prior.
    pub fn mean(&self) -> f64 {
        match self {
            PriorModel::Uniform01 | PriorModel::Sin => 0.5,
            PriorModel::OneMinusCos => 0.5 + 2.0 / (PI * PI),
            PriorModel::PowerLaw { beta, cap, .. } => beta * cap / (beta + 1.0),
        }
    }

    /// The (alpha, beta) pair describing the density near zero.
    pub fn tail_params(&self) -> (f64, f64) {
        match self {
            PriorModel::Uniform01 => (1.0, 1.0),
            PriorModel::Sin => (0.5 * PI * PI, 2.0),
            PriorModel::OneMinusCos => (0.5 * PI * PI, 3.0),
            PriorModel::PowerLaw { alpha, beta, .. } => (*alpha, *beta),
        }
    }

    /// Upper end of the support.
    pub fn support_max(&self) -> f64 {
        match self {
            PriorModel::Uniform01 | PriorModel::Sin | PriorModel::OneMinusCos => 1.0,
            PriorModel::PowerLaw { cap, .. } => *cap,
        }
    }

    /// Inverse cdf. Closed forms where the cdf inverts cleanly, bisection
    /// otherwise. Defined for u in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        match self {
            PriorModel::Uniform01 => u,
            PriorModel::Sin => (1.0 - 2.0 * u).acos() / PI,
            PriorModel::OneMinusCos => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..200 {
                    if hi - lo <= 1e-13 {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < u {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            PriorModel::PowerLaw { alpha, beta, .. } => (u * beta / alpha).powf(1.0 / beta),
        }
    }

    /// One arm mean drawn from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    /// The cdf recomputed by quadrature of the density, for validation.
    pub fn cdf_by_quadrature(&self, z: f64) -> f64 {
        let hi = z.min(self.support_max()).max(0.0);
        quad::integrate(&|mu| self.density(mu), 0.0, hi, 1e-10)
    }
}

/// The threshold worth playing to at horizon n: the root of
/// v(z) = lambda / n, found by bisection on [0, cap].
pub fn optimal_target(prior: &PriorModel, lambda: f64, n: u64) -> Result<f64, Error> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("sampling price must be positive, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let demand = lambda / n as f64;
    let cap = prior.support_max();
    let reachable = prior.expected_shortfall(cap);
    if demand > reachable {
        return Err(Error::TargetOutOfReach { demand, reachable });
    }
    let (mut lo, mut hi) = (0.0f64, cap);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = prior.expected_shortfall(mid);
        if (v - demand).abs() <= TARGET_REL_TOL * demand {
            return Ok(mid);
        }
        if v < demand {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// The constant C in the benchmark regret C * n^(beta / (beta + 1)):
/// (lambda * beta * (beta + 1) / alpha)^(1 / (beta + 1)).
pub fn asymptotic_constant(alpha: f64, beta: f64, lambda: f64) -> f64 {
    (lambda * beta * (beta + 1.0) / alpha).powf(1.0 / (beta + 1.0))
}

/// Large-horizon approximation of the optimal target: C * n^(-1 / (beta + 1)).
pub fn asymptotic_target(alpha: f64, beta: f64, lambda: f64, n: u64) -> f64 {
    asymptotic_constant(alpha, beta, lambda) * (n as f64).powf(-1.0 / (beta + 1.0))
}

/// Benchmark regret level C * n^(beta / (beta + 1)) that no strategy beats by
/// more than lower-order terms.
pub fn benchmark_regret(alpha: f64, beta: f64, lambda: f64, n: u64) -> f64 {
    asymptotic_constant(alpha, beta, lambda) * (n as f64).powf(beta / (beta + 1.0))
}

/// Limiting ratio of the best attainable expected regret to the benchmark
/// C * n^(beta / (beta + 1)) as the horizon grows. Tends to 1 as beta tends
/// to zero and grows slowly with beta.
pub fn regret_ratio_limit(beta: f64) -> f64 {
    let bp = beta + 1.0;
    (1.0 / bp).powf(1.0 / bp) * (2.0 - 1.0 / (bp * bp)) * gamma(2.0 - beta / bp)
}

/// Expected regret of the idealized rule that keeps sampling fresh arms until
/// one with true mean at most z appears, then plays it for the rest of the
/// horizon: lambda / p(z) + n * z - n * v(z) / p(z).
pub fn threshold_regret(prior: &PriorModel, lambda: f64, n: u64, z: f64) -> Result<f64, Error> {
    let p = prior.cdf(z);
    if p <= 0.0 {
        return Err(Error::Config(format!("threshold {z} carries no prior mass")));
    }
    let v = prior.expected_shortfall(z);
    let nf = n as f64;
    Ok(lambda / p + nf * z - nf * v / p)
}

impl fmt::Display for PriorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorModel::Uniform01 => write!(f, "uniform"),
            PriorModel::Sin => write!(f, "sin"),
            PriorModel::OneMinusCos => write!(f, "one-minus-cos"),
            PriorModel::PowerLaw { alpha, beta, cap } => {
                write!(f, "power-law:alpha={alpha},beta={beta},cap={cap}")
            }
        }
    }
}

impl FromStr for PriorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (name, body) = match s.split_once(':') {
            Some((name, body)) => (name.trim(), body),
            None => (s.trim(), ""),
        };
        match name {
            "uniform" | "uniform01" => Ok(PriorModel::Uniform01),
            "sin" => Ok(PriorModel::Sin),
            "one-minus-cos" | "omc" => Ok(PriorModel::OneMinusCos),
            "power-law" => {
                let (mut alpha, mut beta, mut cap) = (None, None, 1.0);
                for part in body.split(',').filter(|p| !p.trim().is_empty()) {
                    let (key, value) = part.trim().split_once('=').ok_or_else(|| {
                        Error::Config(format!("expected key=value, got {part:?}"))
                    })?;
                    let number: f64 = value.trim().parse().map_err(|_| {
                        Error::Config(format!("{key} expects a number, got {value:?}"))
                    })?;
                    match key.trim() {
                        "alpha" => alpha = Some(number),
                        "beta" => beta = Some(number),
                        "cap" => cap = number,
                        other => {
                            return Err(Error::Config(format!(
                                "power-law does not take a {other:?} parameter"
                            )))
                        }
                    }
                }
                match (alpha, beta) {
                    (Some(alpha), Some(beta)) => PriorModel::power_law(alpha, beta, cap),
                    _ => Err(Error::Config(
                        "power-law needs alpha and beta, e.g. power-law:alpha=2,beta=2".into(),
                    )),
                }
            }
            other => Err(Error::Config(format!(
                "unknown prior {other:?}; known: uniform, sin, one-minus-cos, power-law"
            ))),
        }
    }
}

/// The sampling price lambda: the mean cost of one positive draw from a fresh
/// arm, averaged over the prior.
pub fn lambda_of(prior: &PriorModel, reward: &RewardModel) -> Result<f64, Error> {
    match reward {
        RewardModel::Bernoulli => Ok(1.0),
        RewardModel::DatasetReplay => {
            Err(Error::Config("replay arms have no parametric sampling price".into()))
        }
        _ => {
            let cap = prior.support_max();
            let f = |mu: f64| reward.conditional_mean_positive(mu) * prior.density(mu);
            let value = quad::integrate(&f, 0.0, cap, 1e-10);
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Config(format!(
                    "sampling price integral did not converge (got {value})"
                )));
            }
            Ok(value)
        }
    }
}
