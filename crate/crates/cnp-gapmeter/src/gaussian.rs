//! Univariate Gaussian predictives and their KL divergence.
//!
//! The KL divergence between `N(mu1, sigma1^2)` and `N(mu0, sigma0^2)` has the
//! closed form
//!
//! ```text
//! KL = ln(sigma0/sigma1) + (sigma1^2 + (mu1 - mu0)^2) / (2 sigma0^2) - 1/2
//! ```
//!
//! in nats (natural logarithm throughout). For nearby Gaussians the divergence
//! is locally quadratic: with `mu1 = mu0 + eps_mu` and `sigma1 = sigma0 +
//! eps_sigma`, `|eps_sigma| < sigma0/2`,
//!
//! ```text
//! KL = eps_mu^2 / (2 sigma0^2) + eps_sigma^2 / sigma0^2 + O(eps^3)
//! ```
//!
//! because the linear terms in `eps_sigma/sigma0` cancel. Note the variance
//! term carries coefficient 1, not 1/2. [`kl_expansion_audit`] exposes the
//! exact/quadratic split so tests can verify the cubic remainder.

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};

/// A univariate Gaussian predictive distribution `N(mean, std^2)`.
///
/// Both fields are finite and `std > 0`; construction enforces this (the
/// type serializes for reporting but deliberately does not deserialize, so
/// no value can bypass validation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPredictive {
    mean: f64,
    std: f64,
}

impl GaussianPredictive {
    /// Create `N(mean, std^2)`. Rejects non-finite inputs and `std <= 0`.
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !mean.is_finite() || !std.is_finite() {
            return Err(GapError::NonFinite {
                what: "GaussianPredictive",
            });
        }
        if std <= 0.0 {
            return Err(GapError::InvalidParameter {
                name: "std",
                reason: format!("standard deviation must be positive, got {std}"),
            });
        }
        Ok(Self { mean, std })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std(&self) -> f64 {
        self.std
    }

    /// Log probability density at `y`.
    pub fn log_pdf(&self, y: f64) -> f64 {
        let z = (y - self.mean) / self.std;
        -0.5 * (2.0 * std::f64::consts::PI).ln() - self.std.ln() - 0.5 * z * z
    }

    /// Probability density at `y`.
    pub fn pdf(&self, y: f64) -> f64 {
        self.log_pdf(y).exp()
    }
}

/// The exact KL divergence split into its quadratic leading term and the
/// higher-order remainder, for a perturbation `(eps_mu, eps_sigma)` of a base
/// Gaussian. `exact_kl = quadratic_term + remainder` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlExpansion {
    pub quadratic_term: f64,
    pub exact_kl: f64,
    pub remainder: f64,
    pub eps_mu: f64,
    pub eps_sigma: f64,
}

/// KL divergence `KL(p1 || p0)` between univariate Gaussians, in nats.
///
/// The argument order matters: throughout this crate the first slot holds the
/// augmented/perturbed distribution and the second the original, i.e. gap
/// evaluations compute `KL(augmented || original)`.
///
/// Internally uses the equivalent form
///
/// ```text
/// KL = (u - ln(1+u)) + u^2/2 + z^2/2,
///     u = (sigma1 - sigma0)/sigma0,  z = (mu1 - mu0)/sigma0
/// ```
///
/// which avoids the cancellation of the textbook form near `p1 = p0` and
/// returns exactly 0 for identical inputs. Every term is nonnegative, so the
/// result is nonnegative by construction.
pub fn kl_gaussian(p1: &GaussianPredictive, p0: &GaussianPredictive) -> f64 {
    let u = (p1.std - p0.std) / p0.std;
    let z = (p1.mean - p0.mean) / p0.std;
    // u - ln(1+u) >= 0 with equality iff u = 0; clamp guards the final sum
    // against a faithful-rounding wobble of ln_1p at the last ulp.
    ((u - u.ln_1p()) + 0.5 * u * u + 0.5 * z * z).max(0.0)
}

/// Quadratic approximation of the Gaussian KL under a small perturbation:
/// `eps_mu^2 / (2 sigma0^2) + eps_sigma^2 / sigma0^2`.
///
/// Valid (and enforced) only for `|eps_sigma| < sigma0 / 2`.
pub fn kl_quadratic_approx(eps_mu: f64, eps_sigma: f64, sigma0: f64) -> Result<f64> {
    check_expansion_domain(eps_mu, eps_sigma, sigma0)?;
    let zm = eps_mu / sigma0;
    let zs = eps_sigma / sigma0;
    Ok(0.5 * zm * zm + zs * zs)
}

/// Compute the exact KL of the perturbed-vs-base Gaussian, its quadratic
/// approximation, and their difference.
///
/// With `eps_sigma = 0` the Gaussian KL is exactly quadratic in `eps_mu`, so
/// the remainder vanishes (to rounding). Otherwise the remainder is cubic in
/// the perturbation scale, which tests verify by halving the scale and
/// checking the remainder shrinks by a factor near 8.
pub fn kl_expansion_audit(
    p_base: &GaussianPredictive,
    eps_mu: f64,
    eps_sigma: f64,
) -> Result<KlExpansion> {
    check_expansion_domain(eps_mu, eps_sigma, p_base.std)?;
    let perturbed = GaussianPredictive::new(p_base.mean + eps_mu, p_base.std + eps_sigma)?;
    let exact_kl = kl_gaussian(&perturbed, p_base);
    let quadratic_term = kl_quadratic_approx(eps_mu, eps_sigma, p_base.std)?;
    Ok(KlExpansion {
        quadratic_term,
        exact_kl,
        remainder: exact_kl - quadratic_term,
        eps_mu,
        eps_sigma,
    })
}

fn check_expansion_domain(eps_mu: f64, eps_sigma: f64, sigma0: f64) -> Result<()> {
    if !eps_mu.is_finite() || !eps_sigma.is_finite() || !sigma0.is_finite() {
        return Err(GapError::NonFinite {
            what: "KL expansion arguments",
        });
    }
    if sigma0 <= 0.0 {
        return Err(GapError::InvalidParameter {
            name: "sigma0",
            reason: format!("must be positive, got {sigma0}"),
        });
    }
    if eps_sigma.abs() >= sigma0 / 2.0 {
        return Err(GapError::QuadraticDomain { eps_sigma, sigma0 });
    }
    Ok(())
}
