//! Measure the conditioning consistency gap for one explicit CNP instance.
//!
//! Builds a sign-encoder CNP with a linear decoder, conditions it on a small
//! all-negative context, then adds a single positive observation and reports
//! how far the updated predictive moved from the original one (in nats).
//!
//! ```bash
//! cargo run --example measure_gap
//! ```

use cnp_gapmeter::{consistency_gap, ContextSet, DecoderSpec, EncoderSpec};

fn main() -> cnp_gapmeter::Result<()> {
    let encoder = EncoderSpec::sign(1.0)?;
    let decoder = DecoderSpec::linear(vec![1.0], 1.0)?;

    // eight observations, all with negative outputs
    let pairs: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64 / 8.0, -1.0)).collect();
    let context = ContextSet::from_xy(&pairs)?;

    // a maximally surprising new observation: positive output
    let new_point = (vec![0.5], 1.0);
    let target = vec![0.0];

    let gap = consistency_gap(
        &encoder,
        &decoder,
        &context,
        (&new_point.0, new_point.1),
        &target,
    )?;

    println!("context size n        : {}", gap.n);
    println!("mean before / after   : {} -> {}", gap.mu_c, gap.mu_cplus);
    println!(
        "std before / after    : {} -> {}",
        gap.sigma_c, gap.sigma_cplus
    );
    println!("representation shift  : {:?}", gap.delta_r);
    println!("consistency gap       : {} nats", gap.delta);

    // a second observation that agrees with the context does not move the
    // representation at all, so the gap is exactly zero
    let agreeing = consistency_gap(&encoder, &decoder, &context, (&[0.3], -2.0), &target)?;
    println!("gap for an agreeing observation: {} nats", agreeing.delta);
    Ok(())
}
