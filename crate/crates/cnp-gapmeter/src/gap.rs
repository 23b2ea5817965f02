//! The conditioning consistency gap, its bounds, and tight worst cases.
//!
//! The gap for a CNP with context `C`, new observation `(x_*, y_*)`, and
//! target `x_t` is
//!
//! ```text
//! delta = KL( p(y | x_t; C + {(x_*, y_*)}) || p(y | x_t; C) )
//! ```
//!
//! in nats, with the augmented predictive in the first KL slot. A consistent
//! model would have `delta = 0`; a CNP updates its predictions by shifting the
//! aggregated representation instead of conditioning a joint, and the gap
//! prices that shortcut.
//!
//! For a linear decoder `mean = w(x)^T r` with constant variance `sigma` the
//! gap is exactly
//!
//! ```text
//! delta = |w(x_t)^T (h(x_*, y_*) - r_C)|^2 / (2 sigma^2 (n+1)^2)
//!       <= 2 B_W^2 B_h^2 / (sigma^2 (n+1)^2)
//! ```
//!
//! and the bound is attained by an explicit instance: an all-negative context
//! (representation pinned at `-b_h`) hit with a positive, maximally
//! surprising observation. For decoders with mean slope `l_mu`, variance
//! slope `l_sigma`, and variance floor `sigma_min`, the same geometry gives
//!
//! ```text
//! delta <= 2 (l_mu^2 + 2 l_sigma^2) b_h^2 / (sigma_min^2 (n+1)^2)
//! ```
//!
//! as the leading term, valid for `n > 4 l_sigma b_h / sigma_min`, with a
//! cubic-order remainder that the constructions below expose empirically.

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::gaussian::kl_gaussian;
use crate::model::{
    aggregate, augment_representation, encode, predict, representation_shift, ContextPoint,
    ContextSet, DecoderSpec, EncoderSpec, Representation,
};

/// A measured gap together with every intermediate quantity, for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    /// The conditioning consistency gap in nats.
    pub delta: f64,
    /// Predictive mean under the original context.
    pub mu_c: f64,
    /// Predictive mean under the augmented context.
    pub mu_cplus: f64,
    /// Predictive std under the original context.
    pub sigma_c: f64,
    /// Predictive std under the augmented context.
    pub sigma_cplus: f64,
    /// Representation shift `r_{C+} - r_C`.
    pub delta_r: Vec<f64>,
    /// Original context size.
    pub n: usize,
}

/// Constants that entered a bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundConstants {
    Linear {
        b_w: f64,
        b_h: f64,
        sigma: f64,
        n: usize,
    },
    Lipschitz {
        l_mu: f64,
        l_sigma: f64,
        b_h: f64,
        sigma_min: f64,
        n: usize,
    },
}

/// An evaluated upper bound on the gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    /// The bound value in nats (leading term for the Lipschitz family).
    pub bound: f64,
    /// Whether `n` lies in the regime where the bound's derivation holds
    /// (`n > 4 l_sigma b_h / sigma_min`; always true for the linear case).
    pub regime_valid: bool,
    pub constants_used: BoundConstants,
}

/// An explicit instance whose gap attains (or asymptotically attains) the
/// corresponding upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseInstance {
    pub encoder: EncoderSpec,
    pub decoder: DecoderSpec,
    pub context: ContextSet,
    pub new_point: (Vec<f64>, f64),
    pub target: Vec<f64>,
    /// The closed-form gap this instance is constructed to achieve.
    pub predicted_gap: f64,
}

impl WorstCaseInstance {
    /// Run the full two-predictive pipeline on this instance.
    pub fn measure(&self) -> Result<GapResult> {
        consistency_gap(
            &self.encoder,
            &self.decoder,
            &self.context,
            (&self.new_point.0, self.new_point.1),
            &self.target,
        )
    }
}

/// Measure the conditioning consistency gap by running the CNP twice.
///
/// Computes the predictive under `ctx` and under `ctx` augmented with
/// `new_point`, then their KL divergence with the augmented predictive in the
/// first slot.
pub fn consistency_gap(
    enc: &EncoderSpec,
    dec: &DecoderSpec,
    ctx: &ContextSet,
    new_point: (&[f64], f64),
    x_target: &[f64],
) -> Result<GapResult> {
    let r_c = aggregate(enc, ctx)?;
    let h_new = encode(enc, new_point.0, new_point.1)?;
    let r_cplus = augment_representation(&r_c, &h_new)?;
    let delta_r = representation_shift(&r_c, &h_new)?;

    let p_c = predict(dec, x_target, &r_c)?;
    let p_cplus = predict(dec, x_target, &r_cplus)?;
    let delta = kl_gaussian(&p_cplus, &p_c);

    Ok(GapResult {
        delta,
        mu_c: p_c.mean(),
        mu_cplus: p_cplus.mean(),
        sigma_c: p_c.std(),
        sigma_cplus: p_cplus.std(),
        delta_r,
        n: ctx.len(),
    })
}

/// Exact closed-form gap for a constant-variance linear decoder:
/// `|w^T (h_new - r_C)|^2 / (2 sigma^2 (n+1)^2)`.
///
/// `w_at_target` is the decoder weight evaluated at the target input (equal
/// to the stored weights for the x-independent linear family). Agrees with
/// [`consistency_gap`] on the same instance to rounding error.
pub fn gap_linear_exact(
    dec: &DecoderSpec,
    w_at_target: &[f64],
    h_new: &[f64],
    r: &Representation,
) -> Result<f64> {
    let sigma = match dec {
        DecoderSpec::Linear { sigma, .. } => *sigma,
        _ => return Err(GapError::NonLinearDecoder),
    };
    if w_at_target.len() != r.dim() || h_new.len() != r.dim() {
        return Err(GapError::DimensionMismatch {
            expected: r.dim(),
            got: w_at_target.len().max(h_new.len()),
        });
    }
    if r.source_n == 0 {
        return Err(GapError::EmptyContext);
    }
    let projected: f64 = w_at_target
        .iter()
        .zip(h_new.iter().zip(&r.r))
        .map(|(w, (h, ri))| w * (h - ri))
        .sum();
    let n1 = r.source_n as f64 + 1.0;
    Ok(projected * projected / (2.0 * sigma * sigma * n1 * n1))
}

/// Upper bound for linear decoders: `2 B_W^2 B_h^2 / (sigma^2 (n+1)^2)`.
///
/// `b_w = 0` is allowed (a degenerate decoder has zero gap).
pub fn bound_linear(b_w: f64, b_h: f64, sigma: f64, n: usize) -> Result<BoundEvaluation> {
    check_bound_args(
        &[
            ("b_w", b_w, true),
            ("b_h", b_h, false),
            ("sigma", sigma, false),
        ],
        n,
    )?;
    let n1 = n as f64 + 1.0;
    Ok(BoundEvaluation {
        bound: 2.0 * b_w * b_w * b_h * b_h / (sigma * sigma * n1 * n1),
        regime_valid: true,
        constants_used: BoundConstants::Linear { b_w, b_h, sigma, n },
    })
}

/// Smallest context size `n >= 1` at which the linear bound drops below
/// `eps`, i.e. the least integer with `n > sqrt(2 B_W^2 B_h^2 / (sigma^2
/// eps)) - 1`.
///
/// The closed form is adjusted by at most one step so that the returned `n`
/// satisfies `bound_linear(n) < eps` exactly as evaluated, immune to
/// floating-point boundary cases.
pub fn min_context_for_eps(b_w: f64, b_h: f64, sigma: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(GapError::InvalidParameter {
            name: "eps",
            reason: format!("must be positive and finite, got {eps}"),
        });
    }
    check_bound_args(
        &[
            ("b_w", b_w, true),
            ("b_h", b_h, false),
            ("sigma", sigma, false),
        ],
        1,
    )?;
    let threshold = (2.0 * b_w * b_w * b_h * b_h / (sigma * sigma * eps)).sqrt() - 1.0;
    if threshold >= 1e15 {
        return Err(GapError::InvalidParameter {
            name: "eps",
            reason: format!("target gap {eps} needs a context size beyond 1e15 points"),
        });
    }
    let mut n = if threshold < 1.0 {
        1
    } else {
        threshold.floor() as usize + 1
    };
    let below = |n: usize| bound_linear(b_w, b_h, sigma, n).map(|b| b.bound < eps);
    while !below(n)? {
        n += 1;
    }
    while n > 1 && below(n - 1)? {
        n -= 1;
    }
    Ok(n)
}

/// Leading-term upper bound for Lipschitz decoders:
/// `2 (l_mu^2 + 2 l_sigma^2) b_h^2 / (sigma_min^2 (n+1)^2)`.
///
/// The cubic-order remainder is not added; `regime_valid` reports whether
/// `n > 4 l_sigma b_h / sigma_min`, the domain where the derivation's
/// variance perturbation stays within the quadratic expansion's region of
/// validity. Callers comparing measured gaps against this bound budget the
/// missing remainder with a `(1 + 10/n)` slack.
pub fn bound_lipschitz(
    l_mu: f64,
    l_sigma: f64,
    b_h: f64,
    sigma_min: f64,
    n: usize,
) -> Result<BoundEvaluation> {
    check_bound_args(
        &[
            ("l_mu", l_mu, true),
            ("b_h", b_h, false),
            ("sigma_min", sigma_min, false),
        ],
        n,
    )?;
    if !l_sigma.is_finite() || l_sigma < 0.0 {
        return Err(GapError::InvalidParameter {
            name: "l_sigma",
            reason: format!("must be finite and >= 0, got {l_sigma}"),
        });
    }
    let n1 = n as f64 + 1.0;
    let bound = 2.0 * (l_mu * l_mu + 2.0 * l_sigma * l_sigma) * b_h * b_h
        / (sigma_min * sigma_min * n1 * n1);
    Ok(BoundEvaluation {
        bound,
        regime_valid: (n as f64) > 4.0 * l_sigma * b_h / sigma_min,
        constants_used: BoundConstants::Lipschitz {
            l_mu,
            l_sigma,
            b_h,
            sigma_min,
            n,
        },
    })
}

fn check_bound_args(args: &[(&'static str, f64, bool)], n: usize) -> Result<()> {
    for &(name, v, zero_ok) in args {
        let ok = v.is_finite() && if zero_ok { v >= 0.0 } else { v > 0.0 };
        if !ok {
            return Err(GapError::InvalidParameter {
                name,
                reason: format!(
                    "must be {} and finite, got {v}",
                    if zero_ok { "non-negative" } else { "positive" }
                ),
            });
        }
    }
    if n == 0 {
        return Err(GapError::InvalidParameter {
            name: "n",
            reason: "context size must be at least 1".into(),
        });
    }
    Ok(())
}

/// Deterministic context of `n` points with `y_i = -1` and `x_i = i/n`.
///
/// Under the sign encoder the inputs are irrelevant; they are fixed for
/// reproducible serialization.
fn all_negative_context(n: usize) -> ContextSet {
    let points = (1..=n)
        .map(|i| ContextPoint {
            x: vec![i as f64 / n as f64],
            y: -1.0,
            label: None,
        })
        .collect();
    ContextSet::new(points).expect("finite by construction")
}

/// The instance attaining the linear bound exactly: sign encoder, weight at
/// the bound, all-negative context (so `r_C = -b_h`), and a positive new
/// observation (so `h_new = +b_h` and the shift is the maximal `2 b_h /
/// (n+1)`).
pub fn construct_worstcase_linear(
    b_w: f64,
    b_h: f64,
    sigma: f64,
    n: usize,
) -> Result<WorstCaseInstance> {
    let bound = bound_linear(b_w, b_h, sigma, n)?;
    if b_w == 0.0 {
        return Err(GapError::InvalidParameter {
            name: "b_w",
            reason: "worst case requires a non-degenerate decoder (b_w > 0)".into(),
        });
    }
    Ok(WorstCaseInstance {
        encoder: EncoderSpec::sign(b_h)?,
        decoder: DecoderSpec::linear(vec![b_w], sigma)?,
        context: all_negative_context(n),
        new_point: (vec![0.5], 1.0),
        target: vec![0.0],
        predicted_gap: bound.bound,
    })
}

/// The instance attaining the Lipschitz bound's leading constant: linear
/// mean with slope `l_mu`, variance `sigma_min + l_sigma |r - r0|` anchored
/// at `r0 = -b_h`, all-negative context, positive new observation. All three
/// slope inequalities in the bound's derivation are tight simultaneously, so
/// the measured gap differs from the leading term only by the cubic
/// remainder.
pub fn construct_worstcase_lipschitz(
    l_mu: f64,
    l_sigma: f64,
    b_h: f64,
    sigma_min: f64,
    n: usize,
) -> Result<WorstCaseInstance> {
    let bound = bound_lipschitz(l_mu, l_sigma, b_h, sigma_min, n)?;
    Ok(WorstCaseInstance {
        encoder: EncoderSpec::sign(b_h)?,
        decoder: DecoderSpec::linear_abs_variance(l_mu, l_sigma, sigma_min, -b_h)?,
        context: all_negative_context(n),
        new_point: (vec![0.5], 1.0),
        target: vec![0.0],
        predicted_gap: bound.bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianPredictive;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gap_zero_when_new_point_matches_representation() {
        // all-negative context and a negative new point: h_new = r_C exactly
        let enc = EncoderSpec::sign(1.0).unwrap();
        let dec = DecoderSpec::linear(vec![1.0], 1.0).unwrap();
        let ctx = all_negative_context(5);
        let g = consistency_gap(&enc, &dec, &ctx, (&[0.9], -2.0), &[0.0]).unwrap();
        assert_eq!(g.delta, 0.0);
        assert_eq!(g.delta_r, vec![0.0]);
    }

    #[test]
    fn gap_matches_tight_construction_small_n() {
        let inst = construct_worstcase_linear(1.0, 1.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(inst.predicted_gap, 0.5, epsilon = 1e-15);
        let measured = inst.measure().unwrap();
        assert_relative_eq!(measured.delta, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn gap_at_n_100_is_order_1e_minus_4() {
        let inst = construct_worstcase_linear(1.0, 1.0, 1.0, 100).unwrap();
        let measured = inst.measure().unwrap();
        assert_relative_eq!(measured.delta, 2.0 / (101.0 * 101.0), max_relative = 1e-12);
        assert_abs_diff_eq!(measured.delta, 1.960_592_098_813_841_6e-4, epsilon = 1e-15);
    }

    #[test]
    fn gap_result_consistent_with_kl() {
        let enc = EncoderSpec::sign(1.0).unwrap();
        let dec = DecoderSpec::linear_abs_variance(1.0, 0.5, 0.5, -1.0).unwrap();
        let ctx = all_negative_context(9);
        let g = consistency_gap(&enc, &dec, &ctx, (&[0.1], 3.0), &[0.0]).unwrap();
        let p1 = GaussianPredictive::new(g.mu_cplus, g.sigma_cplus).unwrap();
        let p0 = GaussianPredictive::new(g.mu_c, g.sigma_c).unwrap();
        assert_abs_diff_eq!(g.delta, kl_gaussian(&p1, &p0), epsilon = 1e-12);
        assert!(g.delta >= 0.0);
    }

    #[test]
    fn linear_exact_examples() {
        let dec = DecoderSpec::linear(vec![1.0], 1.0).unwrap();
        let r = Representation::new(vec![-1.0], 1);
        assert_eq!(gap_linear_exact(&dec, &[1.0], &[-1.0], &r).unwrap(), 0.0);
        // w = 1, h - r = 2, sigma = 1, n = 1 -> 4 / 8
        assert_abs_diff_eq!(
            gap_linear_exact(&dec, &[1.0], &[1.0], &r).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        // w = 0.5, h - r = 2, sigma = 1, n = 9 -> 1 / 200
        let dec9 = DecoderSpec::linear(vec![0.5], 1.0).unwrap();
        let r9 = Representation::new(vec![-1.0], 9);
        assert_abs_diff_eq!(
            gap_linear_exact(&dec9, &[0.5], &[1.0], &r9).unwrap(),
            0.005,
            epsilon = 1e-15
        );
    }

    #[test]
    fn linear_exact_rejects_nonlinear() {
        let dec = DecoderSpec::catalog("tanh", 0.5).unwrap();
        let r = Representation::new(vec![0.0], 1);
        assert!(matches!(
            gap_linear_exact(&dec, &[1.0], &[1.0], &r),
            Err(GapError::NonLinearDecoder)
        ));
    }

    #[test]
    fn bound_linear_examples() {
        assert_abs_diff_eq!(bound_linear(1.0, 1.0, 1.0, 1).unwrap().bound, 0.5);
        assert_relative_eq!(
            bound_linear(1.0, 1.0, 1.0, 100).unwrap().bound,
            1.960_592_098_813_841_6e-4,
            max_relative = 1e-15
        );
        assert_eq!(bound_linear(0.0, 1.0, 1.0, 5).unwrap().bound, 0.0);
        assert!(bound_linear(1.0, 0.0, 1.0, 5).is_err());
        assert!(bound_linear(1.0, 1.0, -1.0, 5).is_err());
        assert!(bound_linear(1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn min_context_examples() {
        assert_eq!(min_context_for_eps(1.0, 1.0, 1.0, 0.02).unwrap(), 10);
        assert!(bound_linear(1.0, 1.0, 1.0, 10).unwrap().bound < 0.02);
        assert!(bound_linear(1.0, 1.0, 1.0, 9).unwrap().bound >= 0.02);

        assert_eq!(min_context_for_eps(1.0, 1.0, 1.0, 2e-4).unwrap(), 100);
        // already satisfied at n = 1
        assert_eq!(min_context_for_eps(1.0, 1.0, 1.0, 10.0).unwrap(), 1);
        assert!(min_context_for_eps(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(min_context_for_eps(1.0, 1.0, 1.0, -0.5).is_err());
        // unreachable target gaps are rejected rather than searched forever
        assert!(min_context_for_eps(1.0, 1.0, 1.0, 1e-300).is_err());
    }

    #[test]
    fn bound_lipschitz_examples() {
        // l_sigma = 0 coincides with the linear bound at b_w = l_mu
        let lip = bound_lipschitz(0.7, 0.0, 1.3, 0.9, 17).unwrap();
        let lin = bound_linear(0.7, 1.3, 0.9, 17).unwrap();
        assert_abs_diff_eq!(lip.bound, lin.bound, epsilon = 1e-15);
        assert!(lip.regime_valid);

        let b = bound_lipschitz(1.0, 1.0, 1.0, 0.5, 20).unwrap();
        assert_relative_eq!(b.bound, 6.0 / (0.25 * 441.0), max_relative = 1e-15);
        assert!(b.regime_valid); // 20 > 8

        let tight = bound_lipschitz(1.0, 1.0, 1.0, 0.5, 4).unwrap();
        assert!(!tight.regime_valid); // 4 is not > 8

        assert!(bound_lipschitz(1.0, 1.0, 1.0, 0.0, 5).is_err());
        assert!(bound_lipschitz(1.0, -0.1, 1.0, 0.5, 5).is_err());
    }

    #[test]
    fn worstcase_linear_tightness() {
        for n in [1usize, 2, 7, 99, 300] {
            let inst = construct_worstcase_linear(1.0, 1.0, 1.0, n).unwrap();
            let measured = inst.measure().unwrap().delta;
            let bound = bound_linear(1.0, 1.0, 1.0, n).unwrap().bound;
            assert_relative_eq!(measured / bound, 1.0, max_relative = 1e-12);
            assert!(measured > 0.0, "gap must be strictly positive");
        }
        let inst99 = construct_worstcase_linear(1.0, 1.0, 1.0, 99).unwrap();
        assert_abs_diff_eq!(inst99.predicted_gap, 2e-4, epsilon = 1e-18);
    }

    #[test]
    fn worstcase_linear_decay_ratio() {
        // gap(n) / gap(2n - 1) = ((2n) / (n+1))^2 -> 4
        for n in [1usize, 10, 100] {
            let g1 = construct_worstcase_linear(1.0, 1.0, 1.0, n)
                .unwrap()
                .predicted_gap;
            let g2 = construct_worstcase_linear(1.0, 1.0, 1.0, 2 * n - 1)
                .unwrap()
                .predicted_gap;
            let expected = (2.0 * n as f64 / (n as f64 + 1.0)).powi(2);
            assert_relative_eq!(g1 / g2, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn worstcase_linear_target_independent() {
        let inst = construct_worstcase_linear(0.8, 1.2, 0.7, 13).unwrap();
        let base = inst.measure().unwrap().delta;
        for target in [-3.0, 0.0, 1.0, 42.0] {
            let g = consistency_gap(
                &inst.encoder,
                &inst.decoder,
                &inst.context,
                (&inst.new_point.0, inst.new_point.1),
                &[target],
            )
            .unwrap();
            assert_eq!(g.delta, base);
        }
    }

    #[test]
    fn worstcase_lipschitz_degenerate_variance_is_exact() {
        for n in [1usize, 5, 50, 200] {
            let inst = construct_worstcase_lipschitz(1.0, 0.0, 1.0, 0.5, n).unwrap();
            let measured = inst.measure().unwrap().delta;
            assert_relative_eq!(measured, inst.predicted_gap, max_relative = 1e-12);
        }
    }

    #[test]
    fn worstcase_lipschitz_converges_to_leading_term() {
        let inst = construct_worstcase_lipschitz(1.0, 1.0, 1.0, 0.5, 200).unwrap();
        let measured = inst.measure().unwrap().delta;
        let ratio = measured / inst.predicted_gap;
        assert!(
            (0.95..=1.05).contains(&ratio),
            "ratio {ratio} outside [0.95, 1.05] at n = 200"
        );
        assert!(measured > 0.0 && measured.is_finite());
    }

    #[test]
    fn worstcase_instance_serializes() {
        let inst = construct_worstcase_linear(1.0, 1.0, 1.0, 3).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: WorstCaseInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, inst);
    }
}
