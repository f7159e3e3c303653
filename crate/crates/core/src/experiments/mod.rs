//! End-to-end studies built on the mechanism: estimation-error curves,
//! minimax-rate checks, the lower-bound hypothesis family, and the
//! peer-review evaluations (surrogate ground truth and synthetic pools).

mod estimation;
mod icml;
mod lower_bound;

pub use estimation::{
    estimation_error_curve, rate_check, EstimationConfig, EstimationReport, EstimationRow,
    MuStarSpec, RateConfig, RateReport, RateRow,
};
pub use icml::{
    generate_icml_fixture, read_authors, read_reviews, surrogate_eval, synthetic_icml_study,
    synthetic_trials, write_authors, write_reviews, AuthorRecord, AuthorResult, ReviewRecord,
    SurrogateReport, SurrogateRow, SyntheticConfig, SyntheticReport, SyntheticRow, TieChoice,
};
pub use lower_bound::{build_lower_bound, LinearCode, LowerBoundCheck, LowerBoundConstruction};

use rand::Rng;

use crate::error::Result;
use crate::expfam::Family;
use crate::isotonic::{isotonic_mechanism, Ranking};
use crate::mechanism::item_samplers;

/// Squared errors `‖μ̂ − μ⋆‖²` and `‖X − μ⋆‖²` for one simulated author who
/// reports the truthful ranking.
pub(crate) fn truthful_trial<R: Rng + ?Sized>(
    family: &Family,
    mu_star: &[f64],
    scores_per_item: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let samplers = item_samplers(family, mu_star)?;
    let x: Vec<f64> = samplers
        .iter()
        .map(|s| s.sample_mean(scores_per_item, rng))
        .collect();
    let truth = Ranking::by_descending(mu_star)?;
    let mu_hat = isotonic_mechanism(&x, &truth)?.mu_hat;
    let sq = |v: &[f64]| -> f64 { v.iter().zip(mu_star).map(|(a, b)| (a - b) * (a - b)).sum() };
    Ok((sq(&mu_hat), sq(&x)))
}
