//! Result serialization: trials CSV, fit summary JSON, run manifests.
//!
//! Numbers serialize through Rust's shortest round-trip formatting, so
//! parsing an emitted file and re-serializing it reproduces the bytes
//! exactly; determinism checks across worker counts and re-runs compare
//! whole files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::harness::{RateFit, SweepConfig, TrialRecord};

/// Exact header of the trials CSV.
pub const TRIALS_CSV_HEADER: &str = "n,trial_index,delta_nats,bound_nats,seed_used";

/// Serialize trial records (already sorted by `(n, trial_index)`) to CSV.
pub fn trials_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(TRIALS_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.trial_index, r.delta, r.bound, r.seed_used
        ));
    }
    out
}

/// Parse a trials CSV produced by [`trials_to_csv`].
pub fn parse_trials_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRIALS_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(GapError::CsvFormat {
                line: 1,
                message: format!("expected header `{TRIALS_CSV_HEADER}`, got `{header}`"),
            })
        }
        None => {
            return Err(GapError::CsvFormat {
                line: 1,
                message: "empty file".into(),
            })
        }
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(GapError::CsvFormat {
                line: lineno,
                message: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<&str> {
            fields.get(i).copied().ok_or_else(|| GapError::CsvFormat {
                line: lineno,
                message: format!("missing field {name}"),
            })
        };
        let parse_err = |name: &str, v: &str| GapError::CsvFormat {
            line: lineno,
            message: format!("cannot parse {name} from `{v}`"),
        };
        records.push(TrialRecord {
            n: field(0, "n")?
                .parse()
                .map_err(|_| parse_err("n", fields[0]))?,
            trial_index: field(1, "trial_index")?
                .parse()
                .map_err(|_| parse_err("trial_index", fields[1]))?,
            delta: field(2, "delta_nats")?
                .parse()
                .map_err(|_| parse_err("delta_nats", fields[2]))?,
            bound: field(3, "bound_nats")?
                .parse()
                .map_err(|_| parse_err("bound_nats", fields[3]))?,
            seed_used: field(4, "seed_used")?
                .parse()
                .map_err(|_| parse_err("seed_used", fields[4]))?,
        });
    }
    Ok(records)
}

/// Summary of a power-law fit, written next to the trials CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub beta: f64,
    pub r_squared: f64,
    pub n_range: (usize, usize),
    pub log_intercept: f64,
    pub points_used: usize,
}

impl From<RateFit> for FitSummary {
    fn from(fit: RateFit) -> Self {
        FitSummary {
            beta: fit.beta,
            r_squared: fit.r_squared,
            n_range: fit.n_range_used,
            log_intercept: fit.log_intercept,
            points_used: fit.points_used,
        }
    }
}

/// Everything needed to reproduce a run: the resolved config and seed.
///
/// The timestamp and output paths are informational; feeding the
/// `config_echo` back into a sweep regenerates the trials CSV byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_echo: SweepConfig,
    pub timestamp: String,
    pub master_seed: u64,
    pub output_paths: Vec<String>,
}

impl RunManifest {
    pub fn new(config: SweepConfig, output_paths: Vec<String>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            config_echo: config,
            timestamp: chrono::Utc::now().to_rfc3339(),
            output_paths,
        }
    }
}

/// Write a file atomically: contents land under a temporary name in the
/// target directory and are renamed into place, so readers never observe a
/// partial file and failures leave nothing behind.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| GapError::Config {
            message: format!("output path `{}` has no file name", path.display()),
        })?
        .to_string_lossy()
        .into_owned();
    let tmp: PathBuf = dir.join(format!(".{file_name}.tmp.{}", std::process::id()));
    if let Err(e) = std::fs::write(&tmp, contents) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
