//! The Gaussian KL divergence and its local quadratic structure.
//!
//! For nearby Gaussians the KL divergence is quadratic in the mean and
//! standard-deviation perturbations, with the variance term carrying
//! coefficient 1 (not 1/2) because the linear terms cancel. The remainder is
//! cubic: halving the perturbation scale shrinks it roughly eightfold. A pure
//! mean shift has no remainder at all.
//!
//! ```bash
//! cargo run --example kl_expansion
//! ```

use cnp_gapmeter::{kl_expansion_audit, kl_gaussian, GaussianPredictive};

fn main() -> cnp_gapmeter::Result<()> {
    let p0 = GaussianPredictive::new(0.0, 1.0)?;
    let p1 = GaussianPredictive::new(1.0, 1.0)?;
    let p2 = GaussianPredictive::new(0.0, 2.0)?;
    println!("KL(N(1,1) || N(0,1)) = {} nats", kl_gaussian(&p1, &p0));
    println!("KL(N(0,4) || N(0,1)) = {} nats", kl_gaussian(&p2, &p0));

    println!("\ncubic remainder under scale halving (eps_sigma direction):");
    println!(
        "{:>8} {:>24} {:>24} {:>12}",
        "scale", "exact", "quadratic", "ratio"
    );
    let base = GaussianPredictive::new(0.0, 1.0)?;
    let mut previous: Option<f64> = None;
    for i in 0..4 {
        let t = 0.2 / f64::powi(2.0, i);
        let audit = kl_expansion_audit(&base, 0.1 * t, t)?;
        let ratio = previous
            .map(|prev| format!("{:.3}", prev / audit.remainder))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:>8} {:>24} {:>24} {:>12}",
            t, audit.exact_kl, audit.quadratic_term, ratio
        );
        previous = Some(audit.remainder);
    }

    let mean_only = kl_expansion_audit(&base, 0.3, 0.0)?;
    println!(
        "\npure mean shift remainder: {} (exactly quadratic)",
        mean_only.remainder
    );
    Ok(())
}
