//! Seeded, deterministic, parallelizable experiment sweeps.
//!
//! A sweep walks context sizes `n` from `n_min` to `n_max` and records the
//! measured gap and the matching bound per trial:
//!
//! - `random`: contexts and the new observation are drawn from the configured
//!   distribution, `trials_per_n` times per `n`.
//! - `worstcase`: one deterministic record per `n` from the geometry that
//!   maximizes the gap for the configured decoder family (see
//!   [`SweepMode::Worstcase`]).
//! - `singularity`: one record per even `n` from a sign-balanced context that
//!   pins the representation exactly at 0, probing decoders whose slope blows
//!   up there. Odd `n` cannot balance and are skipped.
//!
//! Every trial derives its own RNG seed from `(master_seed, n, trial_index)`
//! through a bijective mixer, so results are identical regardless of how many
//! workers execute the sweep, and record lists come back sorted by
//! `(n, trial_index)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::gap::{
    bound_linear, consistency_gap, construct_worstcase_linear, construct_worstcase_lipschitz,
};
use crate::gaussian::kl_gaussian;
use crate::model::{predict, ContextPoint, ContextSet, DecoderSpec, EncoderSpec, Representation};

/// Environment variable overriding the sweep worker count. Changing it never
/// changes results, only scheduling.
pub const THREADS_ENV_VAR: &str = "CNP_GAPMETER_THREADS";

/// How per-trial contexts and new observations are drawn in `random` mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ContextDistribution {
    /// `y ~ N(0, 1)`, `x` uniform on `[0, 1)`.
    #[default]
    StandardNormal,
}

/// Sweep execution mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Seeded random contexts, `trials_per_n` per context size.
    Random,
    /// Deterministic per-`n` worst case. Linear decoders use the exact tight
    /// construction; the `linear_abs_variance` family uses its leading-term
    /// construction; the bounded-slope catalog decoders are maximized by
    /// brute force over achievable `(r_C, h_new)` pairs; the boundary-case
    /// decoders (sqrt, exp, steep sigmoid) use the maximally surprising
    /// all-negative-context geometry, since their global maximum either
    /// coincides with the singularity probed separately or sits at the
    /// representation boundary it reaches.
    ///
    /// All worst-case geometries are sign-encoder constructions; the
    /// configured encoder contributes only its bound `b_h`.
    Worstcase,
    /// Sign-balanced context (`r_C = 0` exactly under the sign encoder at the
    /// configured bound) plus a positive observation; even `n` only.
    Singularity,
}

/// Full description of one sweep; serializes as the configuration file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "default_trials")]
    pub trials_per_n: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_encoder")]
    pub encoder: EncoderSpec,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub context_distribution: ContextDistribution,
    pub mode: SweepMode,
}

fn default_trials() -> usize {
    1
}

fn default_encoder() -> EncoderSpec {
    EncoderSpec::Sign { b_h: 1.0 }
}

fn default_decoder() -> DecoderSpec {
    DecoderSpec::Linear {
        weights: vec![1.0],
        sigma: 1.0,
        bound: None,
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max {
            return Err(GapError::Config {
                message: format!(
                    "field `n_min`/`n_max`: need 1 <= n_min <= n_max, got [{}, {}]",
                    self.n_min, self.n_max
                ),
            });
        }
        if self.trials_per_n < 1 {
            return Err(GapError::Config {
                message: "field `trials_per_n`: must be at least 1".into(),
            });
        }
        self.encoder.validate().map_err(|e| GapError::Config {
            message: format!("field `encoder`: {e}"),
        })?;
        self.decoder.validate().map_err(|e| GapError::Config {
            message: format!("field `decoder`: {e}"),
        })?;
        Ok(())
    }
}

/// One measured trial: the gap, the bound it is compared against, and the
/// seed that reproduces it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub trial_index: usize,
    pub delta: f64,
    pub bound: f64,
    pub seed_used: u64,
}

/// Fitted power law `delta ~ exp(log_intercept) * n^(-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub beta: f64,
    pub log_intercept: f64,
    pub r_squared: f64,
    pub n_range_used: (usize, usize),
    pub points_used: usize,
}

/// Aggregation applied across trials at each `n` before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Max,
    Mean,
}

/// Stable per-trial seed: a bijective mix of `(master_seed, n, trial_index)`.
///
/// Distinct `(n, trial_index)` pairs below `2^32` map to distinct seeds for
/// any fixed master seed, so the standard sweep grids are collision-free.
pub fn derive_trial_seed(master_seed: u64, n: usize, trial_index: usize) -> u64 {
    let packed = ((n as u64) << 32) | (trial_index as u64 & 0xFFFF_FFFF);
    splitmix64(master_seed ^ packed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run a sweep with the worker count taken from [`THREADS_ENV_VAR`] when set,
/// otherwise rayon's default.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<TrialRecord>> {
    let workers = match std::env::var(THREADS_ENV_VAR) {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| GapError::Config {
            message: format!("{THREADS_ENV_VAR} must be a positive integer, got `{v}`"),
        })?),
        Err(_) => None,
    };
    run_sweep_with_workers(cfg, workers)
}

/// Run a sweep with an explicit worker count (`None` = rayon default).
///
/// The record list is deterministic given the config alone: seeds are derived
/// per trial and results are sorted by `(n, trial_index)`.
pub fn run_sweep_with_workers(
    cfg: &SweepConfig,
    workers: Option<usize>,
) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let items = work_items(cfg)?;

    let eval = |&(n, trial_index): &(usize, usize)| -> Result<TrialRecord> {
        let seed_used = derive_trial_seed(cfg.master_seed, n, trial_index);
        let delta = match cfg.mode {
            SweepMode::Random => random_trial_delta(cfg, n, seed_used)?,
            SweepMode::Worstcase => worstcase_delta(cfg, n)?,
            SweepMode::Singularity => singularity_delta(cfg, n)?,
        };
        Ok(TrialRecord {
            n,
            trial_index,
            delta,
            bound: decoder_bound(cfg, n)?,
            seed_used,
        })
    };

    let mut records: Vec<TrialRecord> = match workers {
        Some(w) => {
            if w == 0 {
                return Err(GapError::Config {
                    message: "worker count must be at least 1".into(),
                });
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| GapError::Config {
                    message: format!("failed to build worker pool: {e}"),
                })?;
            pool.install(|| items.par_iter().map(eval).collect::<Result<Vec<_>>>())?
        }
        None => items.par_iter().map(eval).collect::<Result<Vec<_>>>()?,
    };

    records.sort_by_key(|r| (r.n, r.trial_index));
    Ok(records)
}

fn work_items(cfg: &SweepConfig) -> Result<Vec<(usize, usize)>> {
    let mut items = Vec::new();
    match cfg.mode {
        SweepMode::Random => {
            for n in cfg.n_min..=cfg.n_max {
                for t in 0..cfg.trials_per_n {
                    items.push((n, t));
                }
            }
        }
        SweepMode::Worstcase => {
            items.extend((cfg.n_min..=cfg.n_max).map(|n| (n, 0)));
        }
        SweepMode::Singularity => {
            for n in cfg.n_min..=cfg.n_max {
                if n % 2 == 0 {
                    items.push((n, 0));
                } else {
                    log::debug!("singularity mode: skipping odd context size {n}");
                }
            }
            if items.is_empty() {
                return Err(GapError::NoEvenContextSizes {
                    n_min: cfg.n_min,
                    n_max: cfg.n_max,
                });
            }
        }
    }
    Ok(items)
}

/// The bound recorded next to each trial, from the decoder's declared
/// constants. Infinite when no finite slope constant exists (sqrt).
fn decoder_bound(cfg: &SweepConfig, n: usize) -> Result<f64> {
    let b_h = cfg.encoder.bound();
    match &cfg.decoder {
        DecoderSpec::Linear { sigma, .. } => {
            let b_w = cfg.decoder.linear_weight_bound().unwrap();
            Ok(bound_linear(b_w, b_h, *sigma, n)?.bound)
        }
        other => {
            let c = other.declared(b_h);
            if !c.l_mu.is_finite() {
                return Ok(f64::INFINITY);
            }
            Ok(crate::gap::bound_lipschitz(c.l_mu, c.l_sigma, b_h, c.sigma_min, n)?.bound)
        }
    }
}

fn random_trial_delta(cfg: &SweepConfig, n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // draw order is part of the determinism contract: per point x then y,
    // context points first, then the new observation
    let ContextDistribution::StandardNormal = cfg.context_distribution;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        let y: f64 = rng.sample(StandardNormal);
        points.push(ContextPoint {
            x: vec![x],
            y,
            label: None,
        });
    }
    let x_new: f64 = rng.gen();
    let y_new: f64 = rng.sample(StandardNormal);

    let ctx = ContextSet::new(points)?;
    let gap = consistency_gap(&cfg.encoder, &cfg.decoder, &ctx, (&[x_new], y_new), &[0.0])?;
    Ok(gap.delta)
}

fn worstcase_delta(cfg: &SweepConfig, n: usize) -> Result<f64> {
    let b_h = cfg.encoder.bound();
    match &cfg.decoder {
        DecoderSpec::Linear { sigma, .. } => {
            let b_w = cfg.decoder.linear_weight_bound().unwrap();
            let inst = construct_worstcase_linear(b_w, b_h, *sigma, n)?;
            Ok(inst.measure()?.delta)
        }
        DecoderSpec::LinearAbsVariance {
            l_mu,
            l_sigma,
            sigma_min,
            ..
        } => {
            let inst = construct_worstcase_lipschitz(*l_mu, *l_sigma, b_h, *sigma_min, n)?;
            Ok(inst.measure()?.delta)
        }
        dec if dec.is_lipschitz_catalog() => grid_search_max_gap(dec, b_h, n),
        dec => surprise_construction_delta(b_h, dec, n),
    }
}

/// Brute-force maximum of the gap over the effective degrees of freedom of an
/// x-independent scalar decoder: the achievable representation values
/// `b_h (2k - n) / n` nearest to a 101-point grid of `[-b_h, b_h]`, crossed
/// with the two extreme new encodings.
fn grid_search_max_gap(dec: &DecoderSpec, b_h: f64, n: usize) -> Result<f64> {
    let mut ks = std::collections::BTreeSet::new();
    for j in 0..=100u32 {
        let g = -b_h + 2.0 * b_h * f64::from(j) / 100.0;
        let k = ((g / b_h + 1.0) * n as f64 / 2.0).round() as i64;
        ks.insert(k.clamp(0, n as i64) as usize);
    }
    let mut best = 0.0f64;
    for &k in &ks {
        let r_c = b_h * (2.0 * k as f64 - n as f64) / n as f64;
        for h_new in [-b_h, b_h] {
            best = best.max(gap_at_representation(dec, r_c, h_new, n)?);
        }
    }
    Ok(best)
}

/// Gap for a scalar decoder when the aggregated representation sits at `r_c`
/// and the new encoding is `h_new`. Equivalent to running the full pipeline
/// on any context realizing `r_c`, because the sign encoder ignores inputs
/// and these decoders ignore the target.
fn gap_at_representation(dec: &DecoderSpec, r_c: f64, h_new: f64, n: usize) -> Result<f64> {
    let r = Representation::new(vec![r_c], n);
    let r_plus = Representation::new(vec![(n as f64 * r_c + h_new) / (n as f64 + 1.0)], n + 1);
    let p0 = predict(dec, &[0.0], &r)?;
    let p1 = predict(dec, &[0.0], &r_plus)?;
    Ok(kl_gaussian(&p1, &p0))
}

/// Maximally surprising geometry for boundary-case decoders: all-negative
/// context pins `r_C = -b_h` under the sign encoder, then a positive
/// observation arrives.
fn surprise_construction_delta(b_h: f64, dec: &DecoderSpec, n: usize) -> Result<f64> {
    let enc = EncoderSpec::sign(b_h)?;
    let points = (1..=n)
        .map(|i| ContextPoint {
            x: vec![i as f64 / n as f64],
            y: -1.0,
            label: None,
        })
        .collect();
    let ctx = ContextSet::new(points)?;
    Ok(consistency_gap(&enc, dec, &ctx, (&[0.5], 1.0), &[0.0])?.delta)
}

/// Balanced-context geometry: alternating signs make the aggregated
/// representation exactly zero under the sign encoder, then a positive
/// observation arrives.
fn singularity_delta(cfg: &SweepConfig, n: usize) -> Result<f64> {
    debug_assert!(n.is_multiple_of(2));
    let enc = EncoderSpec::sign(cfg.encoder.bound())?;
    let points = (1..=n)
        .map(|i| ContextPoint {
            x: vec![i as f64 / n as f64],
            y: if i % 2 == 0 { -1.0 } else { 1.0 },
            label: None,
        })
        .collect();
    let ctx = ContextSet::new(points)?;
    Ok(consistency_gap(&enc, &cfg.decoder, &ctx, (&[0.5], 1.0), &[0.0])?.delta)
}

/// Ordinary least squares of `ln(delta_agg)` on `ln(n)`; `beta` is the
/// negated slope. Context sizes whose aggregated delta is zero or negative
/// cannot enter the log fit and are excluded.
pub fn fit_power_law(
    records: &[TrialRecord],
    aggregate: Aggregate,
    n_range: (usize, usize),
) -> Result<RateFit> {
    let (lo, hi) = n_range;
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for r in records {
        if r.n >= lo && r.n <= hi && r.delta.is_finite() {
            by_n.entry(r.n).or_default().push(r.delta);
        }
    }

    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut used_range: Option<(usize, usize)> = None;
    for (n, deltas) in &by_n {
        let agg = match aggregate {
            Aggregate::Max => deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregate::Mean => deltas.iter().sum::<f64>() / deltas.len() as f64,
        };
        if agg > 0.0 && agg.is_finite() {
            points.push(((*n as f64).ln(), agg.ln()));
            used_range = Some(match used_range {
                None => (*n, *n),
                Some((a, b)) => (a.min(*n), b.max(*n)),
            });
        }
    }

    if points.len() < 5 {
        return Err(GapError::InsufficientData {
            needed: 5,
            got: points.len(),
        });
    }

    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };

    Ok(RateFit {
        beta: -slope,
        log_intercept: intercept,
        r_squared,
        n_range_used: used_range.expect("at least 5 points"),
        points_used: points.len(),
    })
}

/// Per-`n` ratio of the (maximal) measured gap to the recorded bound.
///
/// Records must carry positive bounds; for worst-case sweeps of the
/// leading-term family the tail ratios approach 1.
pub fn ratio_to_bound_curve(records: &[TrialRecord]) -> Vec<(usize, f64)> {
    let mut by_n: std::collections::BTreeMap<usize, (f64, f64)> = std::collections::BTreeMap::new();
    for r in records {
        let e = by_n.entry(r.n).or_insert((f64::NEG_INFINITY, r.bound));
        e.0 = e.0.max(r.delta);
        e.1 = r.bound;
    }
    by_n.into_iter()
        .map(|(n, (delta, bound))| (n, delta / bound))
        .collect()
}

/// For each steepness `k`, sweep the steep-sigmoid decoder at its steepest
/// operating point (the balanced, representation-zero geometry) and fit the
/// decay rate. The fitted rate stays near 2 across `k` while the fitted
/// constant `exp(log_intercept)` grows like `k^2`.
///
/// The range should sit inside the quadratic regime `k * b_h / (n + 1) < 1`
/// for the largest `k` scanned; below that the sigmoid saturates and the
/// small-`n` records flatten the fit.
pub fn steep_sigmoid_scan(
    k_values: &[f64],
    n_range: (usize, usize),
    sigma_min: f64,
    b_h: f64,
) -> Result<Vec<(f64, RateFit)>> {
    let mut out = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let cfg = SweepConfig {
            n_min: n_range.0,
            n_max: n_range.1,
            trials_per_n: 1,
            master_seed: 0,
            encoder: EncoderSpec::sign(b_h)?,
            decoder: DecoderSpec::steep_sigmoid(k, sigma_min)?,
            context_distribution: ContextDistribution::StandardNormal,
            mode: SweepMode::Singularity,
        };
        let records = run_sweep_with_workers(&cfg, None)?;
        let fit = fit_power_law(&records, Aggregate::Max, n_range)?;
        out.push((k, fit));
    }
    Ok(out)
}
