//! Gap upper bounds and the minimal context size for a target gap.
//!
//! The linear bound `2 B_W^2 B_h^2 / (sigma^2 (n+1)^2)` and the Lipschitz
//! leading term `2 (L_mu^2 + 2 L_sigma^2) B_h^2 / (sigma_min^2 (n+1)^2)` both
//! decay quadratically in the context size. Inverting the linear bound gives
//! the smallest context at which the gap is guaranteed below a target.
//!
//! ```bash
//! cargo run --example bounds_and_thresholds
//! ```

use cnp_gapmeter::{bound_linear, bound_lipschitz, min_context_for_eps};

fn main() -> cnp_gapmeter::Result<()> {
    println!(
        "unit constants (B_W = B_h = sigma = 1); Lipschitz: L_mu = L_sigma = 1, sigma_min = 0.5"
    );
    println!(
        "{:>6} {:>26} {:>26} {:>9}",
        "n", "linear bound", "lipschitz bound", "regime"
    );
    for n in [1usize, 2, 5, 10, 20, 50, 100, 200, 300] {
        let lin = bound_linear(1.0, 1.0, 1.0, n)?;
        let lip = bound_lipschitz(1.0, 1.0, 1.0, 0.5, n)?;
        println!(
            "{:>6} {:>26} {:>26} {:>9}",
            n,
            lin.bound,
            lip.bound,
            if lip.regime_valid { "valid" } else { "small-n" }
        );
    }

    println!("\nminimal context size with the linear bound below a target gap:");
    for eps in [0.1, 0.02, 2e-4, 1e-6] {
        let n = min_context_for_eps(1.0, 1.0, 1.0, eps)?;
        let at_n = bound_linear(1.0, 1.0, 1.0, n)?.bound;
        println!("  gap < {eps:>8}: n = {n:>5} (bound there: {at_n})");
    }
    Ok(())
}
