//! The constants command: the regret scale constant, its lambda=1 variant,
//! the limiting regret-to-benchmark ratio, per-horizon targets, and
//! lower-bound levels.

use cbt_core::prior::{
    asymptotic_constant, asymptotic_target, benchmark_regret, regret_ratio_limit,
};
use clap::Args;

use crate::Failure;

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// Tail exponents beta to tabulate
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
    pub beta: Vec<f64>,

    /// Tail scale alpha. Defaults per beta to the bundled priors (1 for
    /// beta=1, pi^2/2 for beta=2 and 3); other betas print dashes for the
    /// alpha-dependent columns unless alpha is given.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Sampling price lambda entering C
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// Horizons for the target and lower-bound columns
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1_000, 10_000, 100_000])]
    pub n: Vec<u64>,
}

fn default_alpha(beta: f64) -> Option<f64> {
    if beta == 1.0 {
        Some(1.0)
    } else if beta == 2.0 || beta == 3.0 {
        Some(0.5 * std::f64::consts::PI * std::f64::consts::PI)
    } else {
        None
    }
}

pub fn command(args: ConstantsArgs) -> Result<(), Failure> {
    if args.beta.iter().any(|&b| !b.is_finite() || b <= 0.0) {
        return Err(Failure::Usage("every --beta must be positive and finite".into()));
    }
    if !args.lambda.is_finite() || args.lambda <= 0.0 {
        return Err(Failure::Usage("--lambda must be positive and finite".into()));
    }
    let mut out = std::io::stdout().lock();
    write_report(&mut out, &args).map_err(Failure::from)
}

fn write_report(out: &mut dyn std::io::Write, args: &ConstantsArgs) -> std::io::Result<()> {
    writeln!(out, "constants (lambda = {})", args.lambda)?;
    writeln!(out, "{:>6} {:>10} {:>10} {:>10} {:>8}", "beta", "alpha", "C", "C0", "I_beta")?;
    for &beta in &args.beta {
        let alpha = args.alpha.or_else(|| default_alpha(beta));
        let i_beta = regret_ratio_limit(beta);
        match alpha {
            Some(a) => {
                let c = asymptotic_constant(a, beta, args.lambda);
                let c0 = asymptotic_constant(a, beta, 1.0);
                writeln!(out, "{beta:>6} {a:>10.4} {c:>10.4} {c0:>10.4} {i_beta:>8.4}")?;
            }
            None => {
                writeln!(out, "{beta:>6} {:>10} {:>10} {:>10} {i_beta:>8.4}", "-", "-", "-")?;
            }
        }
    }

    writeln!(out)?;
    writeln!(out, "targets zeta_n = C n^(-1/(beta+1))")?;
    write_per_n(out, args, asymptotic_target)?;

    writeln!(out)?;
    writeln!(out, "lower bounds C n^(beta/(beta+1))")?;
    write_per_n(out, args, benchmark_regret)?;
    Ok(())
}

fn write_per_n(
    out: &mut dyn std::io::Write,
    args: &ConstantsArgs,
    value: impl Fn(f64, f64, f64, u64) -> f64,
) -> std::io::Result<()> {
    let mut header = format!("{:>6}", "beta");
    for n in &args.n {
        header.push_str(&format!(" {:>12}", format!("n={n}")));
    }
    writeln!(out, "{header}")?;
    for &beta in &args.beta {
        let mut line = format!("{beta:>6}");
        match args.alpha.or_else(|| default_alpha(beta)) {
            Some(a) => {
                for &n in &args.n {
                    line.push_str(&format!(" {:>12.4}", value(a, beta, args.lambda, n)));
                }
            }
            None => {
                for _ in &args.n {
                    line.push_str(&format!(" {:>12}", "-"));
                }
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(args: &ConstantsArgs) -> String {
        let mut buffer = Vec::new();
        write_report(&mut buffer, args).unwrap();
        String::from_utf8(buffer).unwrap()
    }

    #[test]
    fn bundled_betas_fill_every_column() {
        let text = report(&ConstantsArgs {
            beta: vec![1.0, 2.0, 3.0],
            alpha: None,
            lambda: 1.0,
            n: vec![100, 1_000, 10_000, 100_000],
        });
        // Benchmark levels for the three bundled priors at n = 100,000 and
        // n = 10,000.
        assert!(text.contains("447.2136"), "{text}");
        assert!(text.contains("2299.4669"), "{text}");
        assert!(text.contains("1248.7568"), "{text}");
        // Limiting ratios to two decimal places: 1.10, 1.17, 1.24.
        assert!(text.contains("1.0966") && text.contains("1.1695") && text.contains("1.2418"));
    }

    #[test]
    fn unknown_beta_without_alpha_prints_dashes_but_keeps_the_ratio() {
        let text =
            report(&ConstantsArgs { beta: vec![10.0], alpha: None, lambda: 1.0, n: vec![100] });
        assert!(text.contains("1.5297"), "{text}");
        assert!(text.contains('-'), "{text}");
    }

    #[test]
    fn explicit_alpha_overrides_the_default() {
        let with_default =
            report(&ConstantsArgs { beta: vec![1.0], alpha: None, lambda: 1.0, n: vec![100] });
        let with_alpha =
            report(&ConstantsArgs { beta: vec![1.0], alpha: Some(4.0), lambda: 1.0, n: vec![100] });
        assert_ne!(with_default, with_alpha);
        // C = (lambda * beta * (beta+1) / alpha)^(1/2) = sqrt(2/4).
        assert!(with_alpha.contains("0.7071"), "{with_alpha}");
    }
}
