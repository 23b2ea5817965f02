//! Analytically specified CNP families: encoders, mean aggregation, decoders.
//!
//! A conditional neural process maps a context set `C = {(x_i, y_i)}` to a
//! Gaussian predictive at any target input via encode-aggregate-decode:
//!
//! 1. an encoder `h(x, y)` maps each context pair to a representation vector,
//! 2. mean aggregation forms `r_C = (1/n) sum_i h(x_i, y_i)`,
//! 3. a decoder maps `(x_target, r_C)` to `N(mean_fn(x, r), var_fn(x, r)^2)`.
//!
//! Adding one observation updates the representation incrementally:
//! `r_{C+} = (n r_C + h_new) / (n + 1)`, so the shift is
//! `(h_new - r_C) / (n + 1)`, the mechanism behind every bound in
//! [`crate::gap`].
//!
//! All model families here are analytic (no training): encoders are bounded
//! by construction, and each decoder family carries declared slope constants
//! that tests verify against finite-difference estimates.

use serde::{Deserialize, Serialize};

use crate::error::{GapError, Result};
use crate::gaussian::GaussianPredictive;

/// One observed context pair: input vector, scalar output, optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextPoint {
    pub x: Vec<f64>,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// An ordered finite collection of context pairs.
///
/// May hold zero points, but any representation query on an empty context
/// fails with [`GapError::EmptyContext`]: the aggregation bounds all assume
/// `n >= 1` and a silent default would corrupt sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSet {
    points: Vec<ContextPoint>,
}

impl ContextSet {
    /// Build a context set, rejecting non-finite coordinates.
    pub fn new(points: Vec<ContextPoint>) -> Result<Self> {
        for p in &points {
            if !p.y.is_finite() || p.x.iter().any(|v| !v.is_finite()) {
                return Err(GapError::NonFinite {
                    what: "context point",
                });
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor for scalar inputs.
    pub fn from_xy(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(x, y)| ContextPoint {
                    x: vec![x],
                    y,
                    label: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ContextPoint] {
        &self.points
    }
}

/// Aggregated representation `r` together with the number of points behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub r: Vec<f64>,
    pub source_n: usize,
}

impl Representation {
    pub fn new(r: Vec<f64>, source_n: usize) -> Self {
        Self { r, source_n }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    /// Euclidean norm of the representation vector.
    pub fn norm(&self) -> f64 {
        self.r.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Bounded analytic encoder families, all with scalar (d = 1) output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncoderSpec {
    /// `h(x, y) = b_h * sign(y)`, independent of `x`. Outputs `+b_h` for
    /// `y >= 0` and `-b_h` otherwise (the zero-measure `y = 0` case is
    /// resolved toward `+b_h` so that `|h| = b_h` always holds).
    Sign { b_h: f64 },
    /// `h(x, y) = b_h * tanh(a * sum(x) + b * y + c)`, strictly inside the
    /// bound.
    BoundedTanh { b_h: f64, a: f64, b: f64, c: f64 },
}

impl EncoderSpec {
    pub fn sign(b_h: f64) -> Result<Self> {
        check_positive("b_h", b_h)?;
        Ok(EncoderSpec::Sign { b_h })
    }

    pub fn bounded_tanh(b_h: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        check_positive("b_h", b_h)?;
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() {
                return Err(GapError::InvalidParameter {
                    name: "bounded_tanh weights",
                    reason: format!("weight {name} must be finite"),
                });
            }
        }
        Ok(EncoderSpec::BoundedTanh { b_h, a, b, c })
    }

    /// The encoder norm bound `b_h`.
    pub fn bound(&self) -> f64 {
        match *self {
            EncoderSpec::Sign { b_h } | EncoderSpec::BoundedTanh { b_h, .. } => b_h,
        }
    }

    /// Re-check constructor invariants (deserialized specs bypass them).
    pub fn validate(&self) -> Result<()> {
        match *self {
            EncoderSpec::Sign { b_h } => EncoderSpec::sign(b_h).map(|_| ()),
            EncoderSpec::BoundedTanh { b_h, a, b, c } => {
                EncoderSpec::bounded_tanh(b_h, a, b, c).map(|_| ())
            }
        }
    }

    /// Output dimension of the representation space.
    pub fn dim(&self) -> usize {
        1
    }

    fn encode_scalar(&self, x: &[f64], y: f64) -> f64 {
        match *self {
            EncoderSpec::Sign { b_h } => {
                if y >= 0.0 {
                    b_h
                } else {
                    -b_h
                }
            }
            EncoderSpec::BoundedTanh { b_h, a, b, c } => {
                let xs: f64 = x.iter().sum();
                b_h * (a * xs + b * y + c).tanh()
            }
        }
    }
}

/// Encode one context pair. The result norm never exceeds the encoder bound.
pub fn encode(enc: &EncoderSpec, x: &[f64], y: f64) -> Result<Vec<f64>> {
    if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(GapError::NonFinite {
            what: "encoder input",
        });
    }
    Ok(vec![enc.encode_scalar(x, y)])
}

/// Mean-aggregate a context set into a representation:
/// `r_C = (1/n) sum_i h(x_i, y_i)`.
pub fn aggregate(enc: &EncoderSpec, ctx: &ContextSet) -> Result<Representation> {
    if ctx.is_empty() {
        return Err(GapError::EmptyContext);
    }
    let n = ctx.len();
    let mut sum = vec![0.0; enc.dim()];
    for p in ctx.points() {
        let h = encode(enc, &p.x, p.y)?;
        for (s, v) in sum.iter_mut().zip(&h) {
            *s += v;
        }
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    Ok(Representation::new(sum, n))
}

/// Incremental representation update when one encoding joins the aggregate:
/// `r_{C+} = (n r_C + h_new) / (n + 1)`.
///
/// Agrees with re-aggregating the augmented context to rounding error.
pub fn augment_representation(r: &Representation, h_new: &[f64]) -> Result<Representation> {
    check_dims(r, h_new)?;
    let n = r.source_n as f64;
    let updated =
        r.r.iter()
            .zip(h_new)
            .map(|(ri, hi)| (n * ri + hi) / (n + 1.0))
            .collect();
    Ok(Representation::new(updated, r.source_n + 1))
}

/// The representation shift caused by one new encoding:
/// `delta_r = r_{C+} - r_C = (h_new - r_C) / (n + 1)`.
///
/// Under a `b_h`-bounded encoder, `|delta_r| <= 2 b_h / (n + 1)`.
pub fn representation_shift(r: &Representation, h_new: &[f64]) -> Result<Vec<f64>> {
    check_dims(r, h_new)?;
    let n = r.source_n as f64;
    Ok(r.r
        .iter()
        .zip(h_new)
        .map(|(ri, hi)| (hi - ri) / (n + 1.0))
        .collect())
}

fn check_dims(r: &Representation, h_new: &[f64]) -> Result<()> {
    if r.source_n == 0 {
        return Err(GapError::EmptyContext);
    }
    if r.dim() != h_new.len() {
        return Err(GapError::DimensionMismatch {
            expected: r.dim(),
            got: h_new.len(),
        });
    }
    Ok(())
}

/// Analytic decoder families.
///
/// `Linear` supports representations of any dimension; all other families are
/// scalar (d = 1). Constant-variance families output `std = sigma_min`
/// everywhere. Each family's declared slope constants are available through
/// [`DecoderSpec::declared`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecoderSpec {
    /// `mean = w . r`, constant `std = sigma`. The weight bound defaults to
    /// `|w|` when not declared explicitly.
    ///
    /// The target-independent weight also realizes the concatenation-style
    /// parameterization `mean = w . [r; x]`: at a fixed target only the
    /// representation block of the weight enters the gap, so the two forms
    /// coincide here.
    Linear {
        weights: Vec<f64>,
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    /// `mean = tanh(r)`, slope bound 1.
    Tanh { sigma_min: f64 },
    /// `mean = sin(r)`, slope bound 1.
    Sinusoidal { sigma_min: f64 },
    /// `mean = max(0, r)`, slope bound 1.
    Relu { sigma_min: f64 },
    /// `mean = ELU(r)`, `std = sigma_min + sigmoid(r)`; slope bounds 1 and 1/4.
    EluSigvar { sigma_min: f64 },
    /// `mean = r^3` on the representation domain `[-b_h, b_h]`, slope bound
    /// `3 b_h^2`.
    Cubic { sigma_min: f64 },
    /// `mean = sign(r) * ln(1 + |r|)`, slope bound 1.
    LogContractive { sigma_min: f64 },
    /// `mean = sign(r) * sqrt(|r|)`: the slope is unbounded at the origin, so
    /// no finite slope constant exists even on a bounded domain.
    Sqrt { sigma_min: f64 },
    /// `mean = exp(r)`: slope bound `exp(b_h)` on the representation domain.
    Exp { sigma_min: f64 },
    /// `mean = 1 / (1 + exp(-k r))`, slope bound `k / 4`.
    SteepSigmoid { k: f64, sigma_min: f64 },
    /// `mean = l_mu * r`, `std = sigma_min + l_sigma * |r - r0|`: the family
    /// whose worst-case gap attains the Lipschitz bound's leading constant.
    LinearAbsVariance {
        l_mu: f64,
        l_sigma: f64,
        sigma_min: f64,
        r0: f64,
    },
}

/// Slope and variance constants a decoder declares for bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeclaredConstants {
    /// Slope bound of the mean function over `[-b_h, b_h]`; infinite when no
    /// finite bound exists (sqrt).
    pub l_mu: f64,
    /// Slope bound of the variance function.
    pub l_sigma: f64,
    /// Uniform lower bound on the predictive standard deviation.
    pub sigma_min: f64,
}

impl DecoderSpec {
    pub fn linear(weights: Vec<f64>, sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(GapError::InvalidParameter {
                name: "weights",
                reason: "must be a nonempty finite vector".into(),
            });
        }
        Ok(DecoderSpec::Linear {
            weights,
            sigma,
            bound: None,
        })
    }

    /// A catalog decoder by name. All have constant variance `sigma_min`
    /// except `elu_sigvar`, whose variance is `sigma_min + sigmoid(r)`.
    pub fn catalog(name: &str, sigma_min: f64) -> Result<Self> {
        check_positive("sigma_min", sigma_min)?;
        Ok(match name {
            "tanh" => DecoderSpec::Tanh { sigma_min },
            "sinusoidal" => DecoderSpec::Sinusoidal { sigma_min },
            "relu" => DecoderSpec::Relu { sigma_min },
            "elu_sigvar" => DecoderSpec::EluSigvar { sigma_min },
            "cubic" => DecoderSpec::Cubic { sigma_min },
            "log_contractive" => DecoderSpec::LogContractive { sigma_min },
            "sqrt" => DecoderSpec::Sqrt { sigma_min },
            "exp" => DecoderSpec::Exp { sigma_min },
            other => {
                return Err(GapError::InvalidParameter {
                    name: "decoder",
                    reason: format!("unknown catalog decoder `{other}`"),
                })
            }
        })
    }

    pub fn steep_sigmoid(k: f64, sigma_min: f64) -> Result<Self> {
        check_positive("k", k)?;
        check_positive("sigma_min", sigma_min)?;
        Ok(DecoderSpec::SteepSigmoid { k, sigma_min })
    }

    pub fn linear_abs_variance(l_mu: f64, l_sigma: f64, sigma_min: f64, r0: f64) -> Result<Self> {
        check_positive("l_mu", l_mu)?;
        check_positive("sigma_min", sigma_min)?;
        if !(l_sigma >= 0.0 && l_sigma.is_finite()) {
            return Err(GapError::InvalidParameter {
                name: "l_sigma",
                reason: format!("must be finite and >= 0, got {l_sigma}"),
            });
        }
        if !r0.is_finite() {
            return Err(GapError::NonFinite { what: "r0" });
        }
        Ok(DecoderSpec::LinearAbsVariance {
            l_mu,
            l_sigma,
            sigma_min,
            r0,
        })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, DecoderSpec::Linear { .. })
    }

    /// Re-check constructor invariants (deserialized specs bypass them).
    pub fn validate(&self) -> Result<()> {
        match self {
            DecoderSpec::Linear {
                weights,
                sigma,
                bound,
            } => {
                DecoderSpec::linear(weights.clone(), *sigma)?;
                if let Some(b) = bound {
                    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                    if !(b.is_finite() && *b >= norm) {
                        return Err(GapError::InvalidParameter {
                            name: "bound",
                            reason: format!(
                                "declared weight bound {b} must be finite and >= |weights| = {norm}"
                            ),
                        });
                    }
                }
                Ok(())
            }
            DecoderSpec::Tanh { sigma_min }
            | DecoderSpec::Sinusoidal { sigma_min }
            | DecoderSpec::Relu { sigma_min }
            | DecoderSpec::EluSigvar { sigma_min }
            | DecoderSpec::Cubic { sigma_min }
            | DecoderSpec::LogContractive { sigma_min }
            | DecoderSpec::Sqrt { sigma_min }
            | DecoderSpec::Exp { sigma_min } => check_positive("sigma_min", *sigma_min),
            DecoderSpec::SteepSigmoid { k, sigma_min } => {
                DecoderSpec::steep_sigmoid(*k, *sigma_min).map(|_| ())
            }
            DecoderSpec::LinearAbsVariance {
                l_mu,
                l_sigma,
                sigma_min,
                r0,
            } => DecoderSpec::linear_abs_variance(*l_mu, *l_sigma, *sigma_min, *r0).map(|_| ()),
        }
    }

    /// The six constant-or-sigmoid-variance families with finite global slope
    /// bounds on `[-b_h, b_h]` independent of where the representation sits.
    pub fn is_lipschitz_catalog(&self) -> bool {
        matches!(
            self,
            DecoderSpec::Tanh { .. }
                | DecoderSpec::Sinusoidal { .. }
                | DecoderSpec::Relu { .. }
                | DecoderSpec::EluSigvar { .. }
                | DecoderSpec::Cubic { .. }
                | DecoderSpec::LogContractive { .. }
        )
    }

    /// Linear weight bound `B_W` (declared, defaulting to the weight norm).
    pub fn linear_weight_bound(&self) -> Option<f64> {
        match self {
            DecoderSpec::Linear { weights, bound, .. } => {
                Some(bound.unwrap_or_else(|| weights.iter().map(|w| w * w).sum::<f64>().sqrt()))
            }
            _ => None,
        }
    }

    /// Slope/variance constants for bound evaluation, over the representation
    /// domain `[-b_h, b_h]` implied by the encoder bound.
    pub fn declared(&self, b_h: f64) -> DeclaredConstants {
        match *self {
            DecoderSpec::Linear { sigma, .. } => DeclaredConstants {
                l_mu: self.linear_weight_bound().unwrap(),
                l_sigma: 0.0,
                sigma_min: sigma,
            },
            DecoderSpec::Tanh { sigma_min }
            | DecoderSpec::Sinusoidal { sigma_min }
            | DecoderSpec::Relu { sigma_min }
            | DecoderSpec::LogContractive { sigma_min } => DeclaredConstants {
                l_mu: 1.0,
                l_sigma: 0.0,
                sigma_min,
            },
            DecoderSpec::EluSigvar { sigma_min } => DeclaredConstants {
                l_mu: 1.0,
                l_sigma: 0.25,
                sigma_min,
            },
            DecoderSpec::Cubic { sigma_min } => DeclaredConstants {
                l_mu: 3.0 * b_h * b_h,
                l_sigma: 0.0,
                sigma_min,
            },
            DecoderSpec::Sqrt { sigma_min } => DeclaredConstants {
                l_mu: f64::INFINITY,
                l_sigma: 0.0,
                sigma_min,
            },
            DecoderSpec::Exp { sigma_min } => DeclaredConstants {
                l_mu: b_h.exp(),
                l_sigma: 0.0,
                sigma_min,
            },
            DecoderSpec::SteepSigmoid { k, sigma_min } => DeclaredConstants {
                l_mu: k / 4.0,
                l_sigma: 0.0,
                sigma_min,
            },
            DecoderSpec::LinearAbsVariance {
                l_mu,
                l_sigma,
                sigma_min,
                ..
            } => DeclaredConstants {
                l_mu,
                l_sigma,
                sigma_min,
            },
        }
    }

    /// Mean function at a scalar representation (non-linear families only).
    pub fn mean_scalar(&self, r: f64) -> f64 {
        match *self {
            DecoderSpec::Linear { ref weights, .. } => weights[0] * r,
            DecoderSpec::Tanh { .. } => r.tanh(),
            DecoderSpec::Sinusoidal { .. } => r.sin(),
            DecoderSpec::Relu { .. } => r.max(0.0),
            DecoderSpec::EluSigvar { .. } => {
                if r >= 0.0 {
                    r
                } else {
                    r.exp() - 1.0
                }
            }
            DecoderSpec::Cubic { .. } => r * r * r,
            DecoderSpec::LogContractive { .. } => r.signum() * r.abs().ln_1p(),
            DecoderSpec::Sqrt { .. } => r.signum() * r.abs().sqrt(),
            DecoderSpec::Exp { .. } => r.exp(),
            DecoderSpec::SteepSigmoid { k, .. } => sigmoid(k * r),
            DecoderSpec::LinearAbsVariance { l_mu, .. } => l_mu * r,
        }
    }

    /// Standard-deviation function at a scalar representation.
    pub fn std_scalar(&self, r: f64) -> f64 {
        match *self {
            DecoderSpec::Linear { sigma, .. } => sigma,
            DecoderSpec::EluSigvar { sigma_min } => sigma_min + sigmoid(r),
            DecoderSpec::LinearAbsVariance {
                l_sigma,
                sigma_min,
                r0,
                ..
            } => sigma_min + l_sigma * (r - r0).abs(),
            DecoderSpec::Tanh { sigma_min }
            | DecoderSpec::Sinusoidal { sigma_min }
            | DecoderSpec::Relu { sigma_min }
            | DecoderSpec::Cubic { sigma_min }
            | DecoderSpec::LogContractive { sigma_min }
            | DecoderSpec::Sqrt { sigma_min }
            | DecoderSpec::Exp { sigma_min }
            | DecoderSpec::SteepSigmoid { sigma_min, .. } => sigma_min,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(GapError::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        });
    }
    Ok(())
}

/// Decode a representation into the Gaussian predictive at a target input.
///
/// All families here are x-independent in the mean and variance, so
/// `x_target` only participates through dimension checks; it is kept in the
/// signature because the decoder contract allows target-dependent weights.
pub fn predict(
    dec: &DecoderSpec,
    _x_target: &[f64],
    r: &Representation,
) -> Result<GaussianPredictive> {
    let (mean, std) = match dec {
        DecoderSpec::Linear { weights, sigma, .. } => {
            if weights.len() != r.dim() {
                return Err(GapError::DimensionMismatch {
                    expected: weights.len(),
                    got: r.dim(),
                });
            }
            let mean: f64 = weights.iter().zip(&r.r).map(|(w, ri)| w * ri).sum();
            (mean, *sigma)
        }
        _ => {
            if r.dim() != 1 {
                return Err(GapError::DimensionMismatch {
                    expected: 1,
                    got: r.dim(),
                });
            }
            (dec.mean_scalar(r.r[0]), dec.std_scalar(r.r[0]))
        }
    };
    if std <= 0.0 {
        // unreachable for the families above, whose variance floors are
        // validated at construction; kept as a hard check
        return Err(GapError::InvalidParameter {
            name: "variance function",
            reason: format!("returned non-positive std {std}"),
        });
    }
    GaussianPredictive::new(mean, std)
}

/// Factorized joint prediction: one independent Gaussian per target.
///
/// The product structure is what makes marginalizing any subset of targets
/// recover the smaller joint exactly; integrating the empty product yields an
/// empty list, so an empty target set is simply mapped through.
pub fn joint_predict(
    dec: &DecoderSpec,
    targets: &[Vec<f64>],
    r: &Representation,
) -> Result<Vec<GaussianPredictive>> {
    targets.iter().map(|x| predict(dec, x, r)).collect()
}
