//! Measure, bound, and stress-test the conditioning consistency gap of
//! conditional neural processes (CNPs).
//!
//! A CNP maps a context set to a Gaussian predictive at any target input via
//! encode-aggregate-decode. Factorized over targets, its joints marginalize
//! consistently, but adding a point to the context is not the same operation
//! as conditioning a joint distribution: the *conditioning consistency gap*
//! is the KL divergence between the augmented-context predictive and the
//! original one. For bounded encoders and Lipschitz decoders the gap decays
//! as `1/n^2` in the context size `n`, the rate is tight, and this crate
//! provides both the exact formulas and the experiment harness that checks
//! them numerically.
//!
//! # Example
//!
//! ```
//! use cnp_gapmeter::{bound_linear, consistency_gap, ContextSet, DecoderSpec, EncoderSpec};
//!
//! let encoder = EncoderSpec::sign(1.0)?;
//! let decoder = DecoderSpec::linear(vec![1.0], 1.0)?;
//! let context = ContextSet::from_xy(&[(0.25, -1.0), (0.5, -1.0), (0.75, -1.0)])?;
//!
//! // an all-negative context hit with a positive observation attains the
//! // worst-case bound exactly
//! let gap = consistency_gap(&encoder, &decoder, &context, (&[0.5], 1.0), &[0.0])?;
//! let bound = bound_linear(1.0, 1.0, 1.0, context.len())?.bound;
//! assert_eq!(gap.delta, bound);
//! # Ok::<(), cnp_gapmeter::GapError>(())
//! ```
//!
//! Module map:
//!
//! - [`gaussian`]: univariate Gaussian predictives, exact KL divergence,
//!   and its quadratic expansion with remainder audit.
//! - [`model`]: analytic encoder and decoder families, mean aggregation,
//!   and the incremental representation update.
//! - [`gap`]: the gap itself, the exact linear formula, both upper bounds,
//!   the minimal-context threshold, and the tight worst-case constructors.
//! - [`harness`]: seeded, deterministic, parallel sweeps; power-law rate
//!   fits; ratio-to-bound curves; the steep-sigmoid constant scan.
//! - [`report`]: CSV and JSON serialization of sweep results, run
//!   manifests, atomic file output.
//! - [`figures`]: dependency-free SVG charts of sweep results.
//! - [`cli`]: the `cnp-gapmeter` command-line tool (`gap`, `sweep`,
//!   `bounds`, `worstcase`).
//!
//! The `examples/` directory contains one runnable example per capability;
//! start with `measure_gap`.

pub mod cli;
pub mod error;
pub mod figures;
pub mod gap;
pub mod gaussian;
pub mod harness;
pub mod model;
pub mod report;

pub use error::{GapError, Result};
pub use gap::{
    bound_linear, bound_lipschitz, consistency_gap, construct_worstcase_linear,
    construct_worstcase_lipschitz, gap_linear_exact, min_context_for_eps, BoundConstants,
    BoundEvaluation, GapResult, WorstCaseInstance,
};
pub use gaussian::{
    kl_expansion_audit, kl_gaussian, kl_quadratic_approx, GaussianPredictive, KlExpansion,
};
pub use harness::{
    fit_power_law, ratio_to_bound_curve, run_sweep, run_sweep_with_workers, steep_sigmoid_scan,
    Aggregate, ContextDistribution, RateFit, SweepConfig, SweepMode, TrialRecord,
};
pub use model::{
    aggregate, augment_representation, encode, joint_predict, predict, representation_shift,
    ContextPoint, ContextSet, DecoderSpec, EncoderSpec, Representation,
};
pub use report::RunManifest;
