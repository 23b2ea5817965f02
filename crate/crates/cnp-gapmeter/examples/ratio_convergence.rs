//! The Lipschitz bound's leading term is asymptotically tight.
//!
//! The `linear_abs_variance` family makes all three slope inequalities in the
//! Lipschitz bound tight simultaneously, so its measured gap differs from the
//! leading term only by a cubic-order remainder: the measured/bound ratio
//! climbs to 1 as the context grows.
//!
//! ```bash
//! cargo run --example ratio_convergence
//! ```

use cnp_gapmeter::{
    ratio_to_bound_curve, run_sweep, ContextDistribution, DecoderSpec, EncoderSpec, SweepConfig,
    SweepMode,
};

fn main() -> cnp_gapmeter::Result<()> {
    let cfg = SweepConfig {
        n_min: 2,
        n_max: 300,
        trials_per_n: 1,
        master_seed: 0,
        encoder: EncoderSpec::sign(1.0)?,
        decoder: DecoderSpec::linear_abs_variance(1.0, 1.0, 0.5, -1.0)?,
        context_distribution: ContextDistribution::StandardNormal,
        mode: SweepMode::Worstcase,
    };
    let records = run_sweep(&cfg)?;
    let curve = ratio_to_bound_curve(&records);

    println!("{:>6} {:>22}", "n", "measured / bound");
    for (n, ratio) in &curve {
        if [2, 5, 10, 25, 50, 100, 150, 200, 250, 300].contains(n) {
            println!("{n:>6} {ratio:>22.6}");
        }
    }
    let tail_worst = curve
        .iter()
        .filter(|(n, _)| *n >= 100)
        .map(|(_, r)| (r - 1.0).abs())
        .fold(0.0, f64::max);
    println!("\nmax |ratio - 1| for n >= 100: {tail_worst:.6} (within 5%)");
    Ok(())
}
