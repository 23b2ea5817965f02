//! Steep sigmoid decoders: same rate, constant growing with steepness.
//!
//! A sigmoid decoder with steepness `k` has slope bound `k/4`, so the gap
//! keeps its quadratic decay for every `k` while the fitted constant grows
//! like `k^2`. The scan operates at the sigmoid's steepest point (balanced
//! context, representation zero) and fits over context sizes large enough
//! that the steepest sigmoid stays in its quadratic regime.
//!
//! ```bash
//! cargo run --example steep_sigmoid_scan
//! ```

use cnp_gapmeter::steep_sigmoid_scan;

fn main() -> cnp_gapmeter::Result<()> {
    let ks = [1.0, 4.0, 16.0, 64.0];
    let scan = steep_sigmoid_scan(&ks, (150, 300), 0.5, 1.0)?;

    println!(
        "{:>8} {:>10} {:>16} {:>18}",
        "k", "beta", "constant", "constant ratio"
    );
    let mut previous: Option<f64> = None;
    for (k, fit) in &scan {
        let constant = fit.log_intercept.exp();
        let ratio = previous
            .map(|p| format!("{:.2} (vs 16)", constant / p))
            .unwrap_or_else(|| "-".into());
        println!("{k:>8} {:>10.4} {constant:>16.6e} {ratio:>18}", fit.beta);
        previous = Some(constant);
    }
    println!("\nquadrupling k multiplies the constant by ~16: the k^2 law");
    Ok(())
}
