//! Isotonic Mechanism for exponential-family review scores.
//!
//! * [`expfam`]: canonical exponential families (Gaussian, Binomial,
//!   Poisson, Gamma), sampling, KL divergence and variance certificates.
//! * [`isotonic`]: rankings, coarse rankings and the projection of scores
//!   onto the cone a ranking defines (pool-adjacent-violators).
//! * [`order`]: majorization predicates and upward-swap chains.
//! * [`mechanism`]: expected utility of reported rankings, estimated with
//!   common random numbers.
//! * [`experiments`]: estimation-error curves, rate checks, the lower-bound
//!   packing, and peer-review evaluations.

pub mod error;
pub mod experiments;
pub mod expfam;
pub mod isotonic;
pub mod mechanism;
pub mod order;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use expfam::{Family, ScoreBounds, VarianceCertificate};
pub use isotonic::{
    coarse_isotonic_mechanism, coarse_to_permutation, isotonic_mechanism, project_descending,
    ranking_constrained_mle, CoarseRanking, Constraint, IsotonicFit, Ranking,
};
pub use mechanism::{MonteCarlo, UtilityEstimate, UtilityFn};
