//! Emit the full SVG panel set into ./gapmeter-figures/.
//!
//! Reproduces the experiment figures at desk scale: random trials against the
//! bound with the tight construction overlaid, worst-case curves for the
//! bounded-slope catalog, the ratio-to-bound convergence, the boundary-case
//! decoders, and the steep-sigmoid family. Panels are plain SVG with no
//! plotting dependency.
//!
//! ```bash
//! cargo run --example emit_figures
//! ```

use cnp_gapmeter::figures::{gap_figure, multi_gap_figure, ratio_figure};
use cnp_gapmeter::report::atomic_write;
use cnp_gapmeter::{
    run_sweep, ContextDistribution, DecoderSpec, EncoderSpec, SweepConfig, SweepMode, TrialRecord,
};
use std::path::Path;

fn sweep(
    decoder: DecoderSpec,
    mode: SweepMode,
    trials: usize,
) -> cnp_gapmeter::Result<Vec<TrialRecord>> {
    run_sweep(&SweepConfig {
        n_min: 2,
        n_max: 300,
        trials_per_n: trials,
        master_seed: 7,
        encoder: EncoderSpec::sign(1.0)?,
        decoder,
        context_distribution: ContextDistribution::StandardNormal,
        mode,
    })
}

fn main() -> cnp_gapmeter::Result<()> {
    let out = Path::new("gapmeter-figures");
    std::fs::create_dir_all(out)?;
    let linear = DecoderSpec::linear(vec![1.0], 1.0)?;

    // random trials vs bound (the construction coincides with the bound line)
    let random = sweep(linear.clone(), SweepMode::Random, 100)?;
    atomic_write(
        &out.join("random_vs_bound.svg"),
        &gap_figure(&random, "random trials vs the linear bound").render_svg(),
    )?;

    // six bounded-slope decoders, worst case per n
    let mut catalog = Vec::new();
    for name in [
        "tanh",
        "sinusoidal",
        "relu",
        "elu_sigvar",
        "cubic",
        "log_contractive",
    ] {
        catalog.push((
            name.to_string(),
            sweep(DecoderSpec::catalog(name, 0.5)?, SweepMode::Worstcase, 1)?,
        ));
    }
    atomic_write(
        &out.join("catalog_worstcase.svg"),
        &multi_gap_figure(&catalog, "worst-case gap, bounded-slope decoders").render_svg(),
    )?;

    // ratio-to-bound convergence for the leading-term-tight family
    let absvar = sweep(
        DecoderSpec::linear_abs_variance(1.0, 1.0, 0.5, -1.0)?,
        SweepMode::Worstcase,
        1,
    )?;
    atomic_write(
        &out.join("ratio_convergence.svg"),
        &ratio_figure(&absvar, "measured gap / bound").render_svg(),
    )?;

    // boundary cases: sqrt worst case and singularity, exp worst case
    let boundary = vec![
        (
            "sqrt worst case".to_string(),
            sweep(DecoderSpec::catalog("sqrt", 0.5)?, SweepMode::Worstcase, 1)?,
        ),
        (
            "sqrt singularity".to_string(),
            sweep(
                DecoderSpec::catalog("sqrt", 0.5)?,
                SweepMode::Singularity,
                1,
            )?,
        ),
        (
            "exp worst case".to_string(),
            sweep(DecoderSpec::catalog("exp", 0.5)?, SweepMode::Worstcase, 1)?,
        ),
    ];
    atomic_write(
        &out.join("boundary_cases.svg"),
        &multi_gap_figure(&boundary, "boundary-case decoders").render_svg(),
    )?;

    // steep sigmoid family across k
    let mut steep = Vec::new();
    for k in [1.0, 4.0, 16.0, 64.0] {
        steep.push((
            format!("k = {k}"),
            sweep(
                DecoderSpec::steep_sigmoid(k, 0.5)?,
                SweepMode::Singularity,
                1,
            )?,
        ));
    }
    atomic_write(
        &out.join("steep_sigmoid.svg"),
        &multi_gap_figure(&steep, "steep sigmoid decoders").render_svg(),
    )?;

    for entry in std::fs::read_dir(out)? {
        println!("wrote {}", entry?.path().display());
    }
    Ok(())
}
