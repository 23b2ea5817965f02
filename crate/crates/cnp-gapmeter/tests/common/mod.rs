//! Shared numerical oracles for integration tests.
//!
//! These deliberately avoid the library's KL implementation: the quadrature
//! oracle integrates densities directly so it can certify the closed form
//! independently.

// each integration test binary compiles this module separately and uses a
// different subset of it
#![allow(dead_code)]

use cnp_gapmeter::GaussianPredictive;

/// Composite Simpson rule over `[a, b]` with `intervals` subintervals
/// (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals + 1
    };
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        sum += if i % 2 == 0 { 2.0 * f(x) } else { 4.0 * f(x) };
    }
    sum * h / 3.0
}

/// KL divergence by direct numerical integration of `p1 ln(p1/p0)` over
/// twelve standard deviations of `p1`. Tail mass beyond the window is far
/// below the 1e-6 comparison tolerance.
pub fn kl_by_quadrature(p1: &GaussianPredictive, p0: &GaussianPredictive) -> f64 {
    let a = p1.mean() - 12.0 * p1.std();
    let b = p1.mean() + 12.0 * p1.std();
    simpson(
        |y| {
            let log_ratio = p1.log_pdf(y) - p0.log_pdf(y);
            p1.pdf(y) * log_ratio
        },
        a,
        b,
        20_000,
    )
}

/// Marginal density of the first target under a factorized 2-target joint,
/// obtained by integrating the joint over the second output.
pub fn marginal_of_joint_by_quadrature(joint: &[GaussianPredictive], y1: f64) -> f64 {
    assert_eq!(joint.len(), 2, "oracle handles the 2-target joint");
    let p2 = &joint[1];
    let a = p2.mean() - 12.0 * p2.std();
    let b = p2.mean() + 12.0 * p2.std();
    simpson(|y2| joint[0].pdf(y1) * p2.pdf(y2), a, b, 20_000)
}

/// Splitmix-style generator so oracle tests stay dependency-light and
/// reproducible without touching the library's seed derivation.
pub struct OracleRng(u64);

impl OracleRng {
    pub fn new(seed: u64) -> Self {
        OracleRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
