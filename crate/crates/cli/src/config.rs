//! Optional key=value defaults file for the run command. Keys mirror the
//! long flags; values look exactly like the flag arguments. Lines starting
//! with # and blank lines are skipped. Explicit flags always win.

use std::path::{Path, PathBuf};

use crate::run::{OutputFormat, RunArgs};
use crate::Failure;

pub fn apply_file(args: &mut RunArgs, path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("config file {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!(
                "config line {}: expected key=value, got {line:?}",
                idx + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        apply_pair(args, key, value)
            .map_err(|m| Failure::Usage(format!("config line {}: {m}", idx + 1)))?;
    }
    Ok(())
}

fn apply_pair(args: &mut RunArgs, key: &str, value: &str) -> Result<(), String> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        value.parse().map_err(|e| format!("{key}: {e}"))
    }

    match key {
        "table" => {
            args.table.get_or_insert(parse(key, value)?);
        }
        "policy" => {
            // Repeatable: every config occurrence appends, unless flags
            // already chose policies.
            if args.policy_from_flags {
                return Ok(());
            }
            args.policy.push(value.to_string());
            return Ok(());
        }
        "prior" => {
            args.prior.get_or_insert(value.to_string());
        }
        "reward" => {
            args.reward.get_or_insert(value.to_string());
        }
        "n" => {
            if args.n.is_empty() {
                for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                    args.n.push(parse(key, part.trim())?);
                }
            }
            return Ok(());
        }
        "reps" => {
            args.reps.get_or_insert(parse(key, value)?);
        }
        "seed" => {
            args.seed.get_or_insert(parse(key, value)?);
        }
        "jobs" => {
            args.jobs.get_or_insert(parse(key, value)?);
        }
        "dataset" => {
            args.dataset.get_or_insert(PathBuf::from(value));
        }
        "out" => {
            args.out.get_or_insert(PathBuf::from(value));
        }
        "format" => {
            args.format.get_or_insert(match value {
                "csv" => OutputFormat::Csv,
                "console" => OutputFormat::Console,
                other => return Err(format!("format: expected csv or console, got {other:?}")),
            });
        }
        "timing" => {
            let flag: bool = parse(key, value)?;
            args.timing = args.timing || flag;
            return Ok(());
        }
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}
