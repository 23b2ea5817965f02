//! The `cnp-gapmeter` command line: `gap`, `sweep`, `bounds`, `worstcase`.
//!
//! Exit codes: 0 on success, 1 on domain errors (for example an empty
//! context), 2 on usage or configuration errors. Sweep outputs are written
//! atomically and removed again if a later step of the same run fails.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{GapError, Result};
use crate::figures;
use crate::gap::{
    bound_linear, bound_lipschitz, consistency_gap, construct_worstcase_linear,
    construct_worstcase_lipschitz, min_context_for_eps,
};
use crate::harness::{
    fit_power_law, run_sweep, steep_sigmoid_scan, Aggregate, ContextDistribution, SweepConfig,
    SweepMode,
};
use crate::model::{ContextPoint, ContextSet, DecoderSpec, EncoderSpec};
use crate::report::{atomic_write, parse_trials_csv, trials_to_csv, FitSummary, RunManifest};

#[derive(Parser)]
#[command(
    name = "cnp-gapmeter",
    version,
    about = "Measure and bound the conditioning consistency gap of conditional neural processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure the gap for one explicit instance; prints a JSON report
    Gap(GapArgs),
    /// Run an experiment sweep; writes trials CSV, fit summary, manifest
    Sweep(Box<SweepArgs>),
    /// Tabulate gap bounds and the minimal context size for a target gap
    Bounds(BoundsArgs),
    /// Print a tight worst-case instance as JSON
    Worstcase(WorstcaseArgs),
}

const DEFAULT_B_H: f64 = 1.0;
const DEFAULT_SIGMA: f64 = 1.0;
const DEFAULT_SIGMA_MIN: f64 = 0.5;
const DEFAULT_K: f64 = 4.0;

/// Encoder/decoder selection shared by `gap` and `sweep`.
#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Encoder family: sign | bounded_tanh
    #[arg(long)]
    encoder: Option<String>,
    /// Encoder norm bound B_h
    #[arg(long)]
    b_h: Option<f64>,
    /// bounded_tanh weight on sum(x)
    #[arg(long, allow_hyphen_values = true)]
    enc_a: Option<f64>,
    /// bounded_tanh weight on y
    #[arg(long, allow_hyphen_values = true)]
    enc_b: Option<f64>,
    /// bounded_tanh offset
    #[arg(long, allow_hyphen_values = true)]
    enc_c: Option<f64>,

    /// Decoder family: linear | tanh | sinusoidal | relu | elu_sigvar |
    /// cubic | log_contractive | sqrt | exp | steep_sigmoid |
    /// linear_abs_variance
    #[arg(long)]
    decoder: Option<String>,
    /// Linear decoder weights, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    weights: Option<String>,
    /// Linear decoder constant std
    #[arg(long)]
    sigma: Option<f64>,
    /// Variance floor for the non-linear families
    #[arg(long)]
    sigma_min: Option<f64>,
    /// Steepness for steep_sigmoid
    #[arg(long)]
    k: Option<f64>,
    /// Mean slope for linear_abs_variance
    #[arg(long)]
    l_mu: Option<f64>,
    /// Variance slope for linear_abs_variance
    #[arg(long)]
    l_sigma: Option<f64>,
    /// Variance reference point for linear_abs_variance
    #[arg(long, allow_hyphen_values = true)]
    r0: Option<f64>,
}

impl ModelArgs {
    fn encoder_given(&self) -> bool {
        self.encoder.is_some()
            || self.b_h.is_some()
            || self.enc_a.is_some()
            || self.enc_b.is_some()
            || self.enc_c.is_some()
    }

    fn decoder_given(&self) -> bool {
        self.decoder.is_some()
            || self.weights.is_some()
            || self.sigma.is_some()
            || self.sigma_min.is_some()
            || self.k.is_some()
            || self.l_mu.is_some()
            || self.l_sigma.is_some()
            || self.r0.is_some()
    }

    fn build_encoder(&self) -> Result<EncoderSpec> {
        let b_h = self.b_h.unwrap_or(DEFAULT_B_H);
        let spec = match self.encoder.as_deref().unwrap_or("sign") {
            "sign" => EncoderSpec::sign(b_h),
            "bounded_tanh" => EncoderSpec::bounded_tanh(
                b_h,
                self.enc_a.unwrap_or(0.0),
                self.enc_b.unwrap_or(1.0),
                self.enc_c.unwrap_or(0.0),
            ),
            other => {
                return Err(config(format!("field `encoder`: unknown family `{other}`")));
            }
        };
        spec.map_err(|e| config(format!("field `encoder`: {e}")))
    }

    fn build_decoder(&self) -> Result<DecoderSpec> {
        let sigma_min = self.sigma_min.unwrap_or(DEFAULT_SIGMA_MIN);
        let spec = match self.decoder.as_deref().unwrap_or("linear") {
            "linear" => {
                let weights = match &self.weights {
                    Some(list) => parse_f64_list(list, "weights")?,
                    None => vec![1.0],
                };
                DecoderSpec::linear(weights, self.sigma.unwrap_or(DEFAULT_SIGMA))
            }
            "steep_sigmoid" => DecoderSpec::steep_sigmoid(self.k.unwrap_or(DEFAULT_K), sigma_min),
            "linear_abs_variance" => DecoderSpec::linear_abs_variance(
                self.l_mu.unwrap_or(1.0),
                self.l_sigma.unwrap_or(0.0),
                sigma_min,
                self.r0.unwrap_or(-DEFAULT_B_H),
            ),
            name => DecoderSpec::catalog(name, sigma_min),
        };
        spec.map_err(|e| config(format!("field `decoder`: {e}")))
    }
}

#[derive(Args, Debug)]
struct GapArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Inline context as comma-separated y values; `y*count` repeats a value
    /// (inputs are set to i/n)
    #[arg(long, allow_hyphen_values = true, conflicts_with = "context_file")]
    context: Option<String>,
    /// Context JSON file: {"points": [{"x": [..], "y": ..}, ..]}
    #[arg(long)]
    context_file: Option<PathBuf>,
    /// New observation input
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    new_x: f64,
    /// New observation output
    #[arg(long, allow_hyphen_values = true)]
    new_y: f64,
    /// Target input
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    target: f64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON sweep configuration file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the exact sweep recorded in a manifest
    #[arg(long, conflicts_with = "config")]
    from_manifest: Option<PathBuf>,

    /// Sweep mode: random | worstcase | singularity
    #[arg(long)]
    mode: Option<String>,
    /// Context size range `lo:hi`
    #[arg(long)]
    n: Option<String>,
    /// Random trials per context size
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    model: ModelArgs,

    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Aggregation across trials for the rate fit: max | mean
    #[arg(long, default_value = "max")]
    fit_aggregate: String,
    /// Rate-fit range `lo:hi` (default: max(n_min, 10) to n_max)
    #[arg(long)]
    fit_range: Option<String>,
    /// Comma-separated figure panels to emit: gap, ratio
    #[arg(long)]
    figures: Option<String>,
    /// Run the steep-sigmoid constant scan over these comma-separated k
    /// values instead of a single sweep (uses the resolved n range, encoder
    /// bound, and variance floor)
    #[arg(long)]
    scan_k: Option<String>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Linear weight bound B_W
    #[arg(long, default_value_t = 1.0)]
    b_w: f64,
    /// Encoder norm bound B_h
    #[arg(long, default_value_t = 1.0)]
    b_h: f64,
    /// Constant predictive std
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Also tabulate the Lipschitz bound with this mean slope
    #[arg(long)]
    l_mu: Option<f64>,
    /// Variance slope for the Lipschitz bound
    #[arg(long, default_value_t = 0.0)]
    l_sigma: f64,
    /// Variance floor for the Lipschitz bound
    #[arg(long)]
    sigma_min: Option<f64>,
    /// Context sizes: comma-separated values and `lo:hi` ranges
    #[arg(long, default_value = "1,2,5,10,20,50,100,200,300")]
    n: String,
    /// Print the minimal n at which the linear bound drops below this gap
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct WorstcaseArgs {
    /// Construction family: linear | lipschitz
    #[arg(long, default_value = "linear")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    b_w: f64,
    #[arg(long, default_value_t = 1.0)]
    b_h: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    l_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    l_sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma_min: f64,
    /// Context size
    #[arg(long)]
    n: usize,
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gap(args) => cmd_gap(args),
        Command::Sweep(args) => cmd_sweep(*args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Worstcase(args) => cmd_worstcase(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                1
            }
        }
    }
}

fn config(message: String) -> GapError {
    GapError::Config { message }
}

fn parse_f64_list(list: &str, field: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| config(format!("field `{field}`: cannot parse `{s}` as a number")))
        })
        .collect()
}

fn parse_range(spec: &str, field: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(config(format!(
            "field `{field}`: expected `lo:hi`, got `{spec}`"
        )));
    }
    let lo = parts[0]
        .parse::<usize>()
        .map_err(|_| config(format!("field `{field}`: cannot parse `{}`", parts[0])))?;
    let hi = parts[1]
        .parse::<usize>()
        .map_err(|_| config(format!("field `{field}`: cannot parse `{}`", parts[1])))?;
    Ok((lo, hi))
}

fn parse_n_spec(spec: &str) -> Result<Vec<usize>> {
    let mut out = BTreeSet::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.contains(':') {
            let (lo, hi) = parse_range(part, "n")?;
            out.extend(lo..=hi);
        } else {
            out.insert(
                part.parse::<usize>()
                    .map_err(|_| config(format!("field `n`: cannot parse `{part}`")))?,
            );
        }
    }
    Ok(out.into_iter().collect())
}

fn parse_inline_context(spec: &str) -> Result<ContextSet> {
    let mut ys = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (value, count) = match item.split_once('*') {
            Some((v, c)) => (
                v.trim(),
                c.trim().parse::<usize>().map_err(|_| {
                    config(format!("field `context`: bad repeat count in `{item}`"))
                })?,
            ),
            None => (item, 1),
        };
        let y = value
            .parse::<f64>()
            .map_err(|_| config(format!("field `context`: cannot parse `{value}`")))?;
        ys.extend(std::iter::repeat_n(y, count));
    }
    let n = ys.len();
    let points = ys
        .into_iter()
        .enumerate()
        .map(|(i, y)| ContextPoint {
            x: vec![(i + 1) as f64 / n.max(1) as f64],
            y,
            label: None,
        })
        .collect();
    ContextSet::new(points)
}

fn cmd_gap(args: GapArgs) -> Result<()> {
    let encoder = args.model.build_encoder()?;
    let decoder = args.model.build_decoder()?;
    let ctx = match (&args.context, &args.context_file) {
        (Some(inline), None) => parse_inline_context(inline)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config(format!("field `context_file`: {e}")))?;
            serde_json::from_str::<ContextSet>(&text)
                .map_err(|e| config(format!("field `context_file`: {e}")))?
        }
        (None, None) => {
            return Err(config(
                "field `context`: provide --context or --context-file".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    let result = consistency_gap(
        &encoder,
        &decoder,
        &ctx,
        (&[args.new_x], args.new_y),
        &[args.target],
    )?;
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(())
}

fn default_sweep_config() -> SweepConfig {
    SweepConfig {
        n_min: 2,
        n_max: 300,
        trials_per_n: 1,
        master_seed: 0,
        encoder: EncoderSpec::Sign { b_h: DEFAULT_B_H },
        decoder: DecoderSpec::Linear {
            weights: vec![1.0],
            sigma: DEFAULT_SIGMA,
            bound: None,
        },
        context_distribution: ContextDistribution::StandardNormal,
        mode: SweepMode::Random,
    }
}

fn resolve_sweep_config(args: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = if let Some(path) = &args.from_manifest {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("field `from_manifest`: {e}")))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| config(format!("field `from_manifest`: {e}")))?;
        manifest.config_echo
    } else if let Some(path) = &args.config {
        let text =
            std::fs::read_to_string(path).map_err(|e| config(format!("field `config`: {e}")))?;
        serde_json::from_str::<SweepConfig>(&text)
            .map_err(|e| config(format!("field `config`: {e}")))?
    } else {
        if args.mode.is_none() && args.scan_k.is_none() {
            return Err(config(
                "field `mode`: required unless --config or --from-manifest is given".into(),
            ));
        }
        default_sweep_config()
    };

    if let Some(mode) = &args.mode {
        cfg.mode = match mode.as_str() {
            "random" => SweepMode::Random,
            "worstcase" => SweepMode::Worstcase,
            "singularity" => SweepMode::Singularity,
            other => return Err(config(format!("field `mode`: unknown mode `{other}`"))),
        };
    }
    if let Some(n) = &args.n {
        let (lo, hi) = parse_range(n, "n")?;
        cfg.n_min = lo;
        cfg.n_max = hi;
    }
    if let Some(trials) = args.trials {
        cfg.trials_per_n = trials;
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if args.model.encoder_given() {
        cfg.encoder = args.model.build_encoder()?;
    }
    if args.model.decoder_given() {
        cfg.decoder = args.model.build_decoder()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fit_aggregate(args: &SweepArgs) -> Result<Aggregate> {
    match args.fit_aggregate.as_str() {
        "max" => Ok(Aggregate::Max),
        "mean" => Ok(Aggregate::Mean),
        other => Err(config(format!(
            "field `fit_aggregate`: expected max or mean, got `{other}`"
        ))),
    }
}

/// Remove every file this run created, then return the error.
fn cleanup_on_error<E>(written: &[PathBuf], err: E) -> E {
    for path in written {
        let _ = std::fs::remove_file(path);
    }
    err
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let cfg = resolve_sweep_config(&args)?;
    std::fs::create_dir_all(&args.out)?;

    if let Some(scan) = &args.scan_k {
        return cmd_scan(&args, &cfg, scan);
    }

    let mut written: Vec<PathBuf> = Vec::new();
    match sweep_outputs(&args, &cfg, &mut written) {
        Ok(()) => Ok(()),
        Err(e) => Err(cleanup_on_error(&written, e)),
    }
}

/// Run the sweep and write every output, pushing each path into `written` as
/// it lands so a failure at any later step can remove what came before.
fn sweep_outputs(args: &SweepArgs, cfg: &SweepConfig, written: &mut Vec<PathBuf>) -> Result<()> {
    let records = run_sweep(cfg)?;

    let csv_path = args.out.join("trials.csv");
    atomic_write(&csv_path, &trials_to_csv(&records))?;
    written.push(csv_path.clone());

    let aggregate = fit_aggregate(args)?;
    let fit_range = match &args.fit_range {
        Some(spec) => parse_range(spec, "fit_range")?,
        None => (cfg.n_min.max(10).min(cfg.n_max), cfg.n_max),
    };
    let fit = fit_power_law(&records, aggregate, fit_range)?;
    let summary = FitSummary::from(fit);
    let fit_path = args.out.join("fit_summary.json");
    atomic_write(&fit_path, &serde_json::to_string_pretty(&summary)?)?;
    written.push(fit_path);

    if let Some(panels) = &args.figures {
        // figures are derived from the emitted CSV, never from live state
        let csv_text = std::fs::read_to_string(&csv_path)?;
        let parsed = parse_trials_csv(&csv_text)?;
        for panel in panels.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, chart) = match panel {
                "gap" => (
                    "fig_gap.svg",
                    figures::gap_figure(&parsed, "gap vs context size"),
                ),
                "ratio" => (
                    "fig_ratio.svg",
                    figures::ratio_figure(&parsed, "gap / bound vs context size"),
                ),
                other => {
                    return Err(config(format!(
                        "field `figures`: unknown panel `{other}` (expected gap, ratio)"
                    )))
                }
            };
            let path = args.out.join(name);
            atomic_write(&path, &chart.render_svg())?;
            written.push(path);
        }
    }

    let manifest = RunManifest::new(
        cfg.clone(),
        written
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect(),
    );
    let manifest_path = args.out.join("manifest.json");
    atomic_write(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
    written.push(manifest_path);

    println!(
        "sweep complete: {} records, beta = {}, r^2 = {}",
        records.len(),
        summary.beta,
        summary.r_squared
    );
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_scan(args: &SweepArgs, cfg: &SweepConfig, scan: &str) -> Result<()> {
    let k_values = parse_f64_list(scan, "scan_k")?;
    let b_h = cfg.encoder.bound();
    let sigma_min = cfg.decoder.declared(b_h).sigma_min;
    let results = steep_sigmoid_scan(&k_values, (cfg.n_min, cfg.n_max), sigma_min, b_h)?;

    #[derive(serde::Serialize)]
    struct ScanEntry {
        k: f64,
        beta: f64,
        log_intercept: f64,
        constant: f64,
        r_squared: f64,
        points_used: usize,
    }
    let entries: Vec<ScanEntry> = results
        .iter()
        .map(|(k, fit)| ScanEntry {
            k: *k,
            beta: fit.beta,
            log_intercept: fit.log_intercept,
            constant: fit.log_intercept.exp(),
            r_squared: fit.r_squared,
            points_used: fit.points_used,
        })
        .collect();

    let path = args.out.join("scan_summary.json");
    let written = vec![path.clone()];
    atomic_write(&path, &serde_json::to_string_pretty(&entries)?)
        .map_err(|e| cleanup_on_error(&written, e))?;
    for e in &entries {
        println!("k = {}: beta = {}, constant = {}", e.k, e.beta, e.constant);
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    // the bounds table is pure constant validation; any rejection is a usage error
    let usage = |e: GapError| config(e.to_string());

    let ns = parse_n_spec(&args.n)?;
    let lipschitz = match (args.l_mu, args.sigma_min) {
        (Some(l_mu), Some(sigma_min)) => Some((l_mu, sigma_min)),
        (None, None) => None,
        _ => {
            return Err(config(
                "fields `l_mu`/`sigma_min`: both are needed for the Lipschitz bound".into(),
            ))
        }
    };

    if lipschitz.is_some() {
        println!(
            "{:>6} {:>24} {:>24} {:>8}",
            "n", "linear_bound", "lipschitz_bound", "regime"
        );
    } else {
        println!("{:>6} {:>24}", "n", "linear_bound");
    }
    for &n in &ns {
        let lin = bound_linear(args.b_w, args.b_h, args.sigma, n).map_err(usage)?;
        match lipschitz {
            Some((l_mu, sigma_min)) => {
                let lip =
                    bound_lipschitz(l_mu, args.l_sigma, args.b_h, sigma_min, n).map_err(usage)?;
                println!(
                    "{:>6} {:>24} {:>24} {:>8}",
                    n,
                    lin.bound,
                    lip.bound,
                    if lip.regime_valid { "valid" } else { "small-n" }
                );
            }
            None => println!("{:>6} {:>24}", n, lin.bound),
        }
    }

    if let Some(eps) = args.eps {
        let n_min = min_context_for_eps(args.b_w, args.b_h, args.sigma, eps).map_err(usage)?;
        let at = bound_linear(args.b_w, args.b_h, args.sigma, n_min).map_err(usage)?;
        println!(
            "minimal n with linear bound < {eps}: {n_min} (bound there = {})",
            at.bound
        );
    }
    Ok(())
}

fn cmd_worstcase(args: WorstcaseArgs) -> Result<()> {
    let instance = match args.family.as_str() {
        "linear" => construct_worstcase_linear(args.b_w, args.b_h, args.sigma, args.n)?,
        "lipschitz" => construct_worstcase_lipschitz(
            args.l_mu,
            args.l_sigma,
            args.b_h,
            args.sigma_min,
            args.n,
        )?,
        other => {
            return Err(config(format!(
                "field `family`: expected linear or lipschitz, got `{other}`"
            )))
        }
    };
    println!("{}", serde_json::to_string_pretty(&instance)?);
    Ok(())
}
