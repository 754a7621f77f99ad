//! The run command: executes a plan cell by cell and prints CSV or a
//! console table.

use std::io::Write;
use std::path::PathBuf;

use cbt_core::engine::{monte_carlo, write_csv, MonteCarloSummary};
use clap::{Args, ValueEnum};

use crate::config;
use crate::tables;
use crate::Failure;

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Preset table: 1 uniform, 2 sin, 3 one-minus-cos (all Bernoulli), 4 dataset replay
    #[arg(long)]
    pub table: Option<u8>,

    /// Policy spec such as cbt:zeta=auto or two-target:f=3. Repeatable.
    /// With --table it keeps only the preset rows whose name matches.
    #[arg(long)]
    pub policy: Vec<String>,

    /// Prior for ad-hoc runs: uniform, sin, one-minus-cos, power-law:alpha=..,beta=..
    #[arg(long)]
    pub prior: Option<String>,

    /// Reward family for ad-hoc runs: bernoulli, poisson, two-point:support=S,
    /// scaled-exponential, scaled-uniform
    #[arg(long)]
    pub reward: Option<String>,

    /// Horizons, comma separated or repeated
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,

    /// Replications per cell (default 10000)
    #[arg(long)]
    pub reps: Option<u64>,

    /// Base seed; replication r runs on seed + r (default 0)
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads for replications; 0 lets the scheduler decide
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Recorded reward traces for replay runs (required by table 4)
    #[arg(long)]
    pub dataset: Option<PathBuf>,

    /// Write CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format (default csv)
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,

    /// key=value defaults file; explicit flags win
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Record wall-clock milliseconds in the CSV. Off by default so that
    /// reruns with the same flags stay byte-identical.
    #[arg(long)]
    pub timing: bool,

    #[arg(skip)]
    pub policy_from_flags: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Console,
}

pub fn command(mut args: RunArgs) -> Result<(), Failure> {
    args.policy_from_flags = !args.policy.is_empty();
    if let Some(path) = args.config.clone() {
        config::apply_file(&mut args, &path)?;
    }
    let plan = tables::plan(&args)?;

    let mut summaries = Vec::with_capacity(plan.cells.len());
    for cell in &plan.cells {
        summaries.push(monte_carlo(cell)?);
    }
    summaries.extend(plan.bounds.iter().cloned());

    let format = args.format.unwrap_or(OutputFormat::Csv);
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        OutputFormat::Csv => write_csv(&summaries, args.timing, &mut sink)?,
        OutputFormat::Console => {
            render_console(&mut sink, &summaries, plan.per_play, plan.best_mean)?
        }
    }
    Ok(())
}

/// One row per policy, one column per horizon, cells mean +- SE. The replay
/// table divides by the horizon (per-play average) and adds a second block
/// with the excess over the best recorded arm.
fn render_console(
    out: &mut dyn Write,
    summaries: &[MonteCarloSummary],
    per_play: bool,
    best_mean: Option<f64>,
) -> Result<(), Failure> {
    let mut policies: Vec<&str> = Vec::new();
    let mut horizons: Vec<u64> = Vec::new();
    for s in summaries {
        if !policies.contains(&s.policy.as_str()) {
            policies.push(&s.policy);
        }
        if !horizons.contains(&s.horizon) {
            horizons.push(s.horizon);
        }
    }

    let cell = |policy: &str, n: u64| -> String {
        let Some(s) = summaries.iter().find(|s| s.policy == policy && s.horizon == n) else {
            return "-".into();
        };
        let scale = if per_play { n as f64 } else { 1.0 };
        if s.replications == 0 {
            // Analytic row: no simulation error to report.
            format!("{:.1}", s.mean_regret / scale)
        } else {
            format!("{:.1}±{:.1}", s.mean_regret / scale, s.standard_error / scale)
        }
    };

    let label = if per_play { "mean regret per play" } else { "mean regret" };
    write_grid(out, label, &policies, &horizons, &cell)?;

    if let (true, Some(best)) = (per_play, best_mean) {
        let excess = |policy: &str, n: u64| -> String {
            let Some(s) = summaries.iter().find(|s| s.policy == policy && s.horizon == n) else {
                return "-".into();
            };
            format!("{:.1}", s.mean_regret / n as f64 - best)
        };
        writeln!(out).map_err(Failure::from)?;
        write_grid(
            out,
            "excess per play over the best recorded arm",
            &policies,
            &horizons,
            &excess,
        )?;
    }
    Ok(())
}

fn write_grid(
    out: &mut dyn Write,
    title: &str,
    policies: &[&str],
    horizons: &[u64],
    cell: &dyn Fn(&str, u64) -> String,
) -> Result<(), Failure> {
    let mut header: Vec<String> = vec![title.to_string()];
    header.extend(horizons.iter().map(|n| format!("n={n}")));
    let mut rows: Vec<Vec<String>> = vec![header];
    for policy in policies {
        let mut row = vec![policy.to_string()];
        row.extend(horizons.iter().map(|&n| cell(policy, n)));
        rows.push(row);
    }

    let columns = rows[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let mut line = String::new();
        for (c, text) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            if c == 0 {
                line.push_str(&format!("{text:<width$}", width = widths[c]));
            } else {
                line.push_str(&format!("{text:>width$}", width = widths[c]));
            }
        }
        writeln!(out, "{}", line.trim_end()).map_err(Failure::from)?;
    }
    Ok(())
}
