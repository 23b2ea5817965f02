//! Where the quadratic rate breaks: the sqrt decoder at its singularity.
//!
//! The sqrt decoder's slope is unbounded at the origin, yet its worst-case
//! geometry (representation pinned at the boundary) still decays with
//! `beta ~ 2`, because the local slope at the operating point is finite. Only
//! when the context is sign-balanced so the representation sits exactly at
//! the singularity does the rate degrade to `beta ~ 1`, and the exponential
//! decoder, not globally bounded-slope either, stays at `beta ~ 2` on its
//! bounded domain. The variance floor, not mean smoothness, carries the rate.
//!
//! ```bash
//! cargo run --example singularity_rate
//! ```

use cnp_gapmeter::{
    fit_power_law, run_sweep, Aggregate, ContextDistribution, DecoderSpec, EncoderSpec,
    SweepConfig, SweepMode,
};

fn fit_for(decoder: DecoderSpec, mode: SweepMode) -> cnp_gapmeter::Result<f64> {
    let cfg = SweepConfig {
        n_min: 10,
        n_max: 300,
        trials_per_n: 1,
        master_seed: 0,
        encoder: EncoderSpec::sign(1.0)?,
        decoder,
        context_distribution: ContextDistribution::StandardNormal,
        mode,
    };
    Ok(fit_power_law(&run_sweep(&cfg)?, Aggregate::Max, (10, 300))?.beta)
}

fn main() -> cnp_gapmeter::Result<()> {
    let sqrt_worst = fit_for(DecoderSpec::catalog("sqrt", 0.5)?, SweepMode::Worstcase)?;
    let sqrt_singular = fit_for(DecoderSpec::catalog("sqrt", 0.5)?, SweepMode::Singularity)?;
    let exp_worst = fit_for(DecoderSpec::catalog("exp", 0.5)?, SweepMode::Worstcase)?;

    println!("sqrt, worst-case geometry   : beta = {sqrt_worst:.4}");
    println!("sqrt, at the singularity    : beta = {sqrt_singular:.4}");
    println!("exp, worst-case geometry    : beta = {exp_worst:.4}");
    Ok(())
}
