//! Deviation and risk bounds for samples from infinitely divisible laws with
//! zero Gaussian component, and the Monte-Carlo machinery that checks them.
//!
//! * [`levy`]: generating triplets, Lévy measures and their summaries.
//! * [`sampler`]: exact, reproducible draws from finite-activity triplets.
//! * [`bounds`]: `tau`, `phi`, the deviation and risk bounds, and the rate
//!   exponent `γ` with its maximizer `x̂`.
//! * [`function_class`]: Lipschitz ramp families, exact risks and `L1`
//!   covering numbers.
//! * [`experiments`]: tail estimates with exact binomial intervals, bound
//!   dominance, symmetrization and the rate sweep.
//! * [`config`]: the JSON schema shared by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod experiments;
pub mod function_class;
pub mod levy;
pub mod numeric;
pub mod poisson;
pub mod rng;
pub mod sampler;

pub use bounds::{BoundMethod, BoundReport, TauContext};
pub use error::{Error, Result};
pub use function_class::{LipschitzFn, LipschitzRampFamily, Ramp};
pub use levy::{Atom, AtomicLevyMeasure, ExpIntensityMeasure, GeneratingTriplet, LevyMeasure};
pub use sampler::SampleSet;
