//! Worst-case decay rates for the six bounded-slope decoder families.
//!
//! For each catalog decoder the sweep maximizes the gap per context size by
//! brute force over the achievable representation values and the two extreme
//! new encodings, then fits `gap ~ n^(-beta)`. Every family decays with
//! `beta ~ 2`: bounded slope is what keeps the rate quadratic, regardless of
//! the decoder's shape.
//!
//! ```bash
//! cargo run --example decoder_rates
//! ```

use cnp_gapmeter::{
    fit_power_law, run_sweep, Aggregate, ContextDistribution, DecoderSpec, EncoderSpec,
    SweepConfig, SweepMode,
};

fn main() -> cnp_gapmeter::Result<()> {
    println!(
        "{:>16} {:>10} {:>12} {:>10}",
        "decoder", "beta", "r^2", "points"
    );
    for name in [
        "tanh",
        "sinusoidal",
        "relu",
        "elu_sigvar",
        "cubic",
        "log_contractive",
    ] {
        let cfg = SweepConfig {
            n_min: 10,
            n_max: 300,
            trials_per_n: 1,
            master_seed: 0,
            encoder: EncoderSpec::sign(1.0)?,
            decoder: DecoderSpec::catalog(name, 0.5)?,
            context_distribution: ContextDistribution::StandardNormal,
            mode: SweepMode::Worstcase,
        };
        let records = run_sweep(&cfg)?;
        let fit = fit_power_law(&records, Aggregate::Max, (10, 300))?;
        println!(
            "{:>16} {:>10.4} {:>12.6} {:>10}",
            name, fit.beta, fit.r_squared, fit.points_used
        );
    }
    Ok(())
}
