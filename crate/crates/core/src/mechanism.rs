//! Expected utility of reported rankings under the isotonic mechanism.
//!
//! An author with ground-truth means `μ⋆` reports a (coarse) ranking, the
//! mechanism projects the noisy averaged scores onto it, and the author
//! collects `Σ U(μ̂ᵢ)` for a nondecreasing convex `U`. Expectations are
//! estimated by Monte Carlo with common random numbers: trial `t` draws the
//! same scores for every candidate ranking, so differences between
//! candidates have far smaller variance than the estimates themselves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{Family, MeanSampler};
use crate::isotonic::{fit, Constraint, CoarseRanking, Ranking};
use crate::rng::{substream, tag};
use crate::stats::Running;

/// Nondecreasing convex utility of an adjusted score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityFn {
    /// `max(x, 0)²`
    #[default]
    ReluSquare,
    Identity,
    /// `exp(αx)`, `α ≥ 0`
    Exp { alpha: f64 },
    /// `max(x − t, 0)`
    Hinge { t: f64 },
}

impl UtilityFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            UtilityFn::Exp { alpha } if !(alpha.is_finite() && alpha >= 0.0) => Err(
                Error::InvalidParameter(format!("exp utility needs alpha >= 0, got {alpha}")),
            ),
            UtilityFn::Hinge { t } if !t.is_finite() => Err(Error::InvalidParameter(
                "hinge threshold must be finite".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            UtilityFn::ReluSquare => {
                let r = x.max(0.0);
                r * r
            }
            UtilityFn::Identity => x,
            UtilityFn::Exp { alpha } => (alpha * x).exp(),
            UtilityFn::Hinge { t } => (x - t).max(0.0),
        }
    }
}

impl std::str::FromStr for UtilityFn {
    type Err = Error;

    /// Parses `relu_square`, `identity`, `exp:<alpha>` or `hinge:<t>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidInput(format!("utility {name} needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("bad utility parameter: {e}")))
        };
        let u = match name {
            "relu_square" => UtilityFn::ReluSquare,
            "identity" => UtilityFn::Identity,
            "exp" => UtilityFn::Exp { alpha: num(arg)? },
            "hinge" => UtilityFn::Hinge { t: num(arg)? },
            other => return Err(Error::InvalidInput(format!("unknown utility {other:?}"))),
        };
        u.validate()?;
        Ok(u)
    }
}

/// Monte-Carlo estimate of an expected utility (or of a paired difference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Sampling settings shared by the utility experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    /// Review scores averaged into each observed score.
    pub scores_per_item: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo {
            scores_per_item: 3,
            trials: 100_000,
            seed: 0,
        }
    }
}

impl MonteCarlo {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.scores_per_item == 0 {
            return Err(Error::InvalidInput(
                "trials and scores_per_item must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `Σᵢ U(μ̂ᵢ)`.
pub fn realized_utility(mu_hat: &[f64], u: &UtilityFn) -> f64 {
    mu_hat.iter().map(|&x| u.eval(x)).sum()
}

pub(crate) fn item_samplers(family: &Family, mu_star: &[f64]) -> Result<Vec<MeanSampler>> {
    if mu_star.is_empty() {
        return Err(Error::InvalidInput("mu_star is empty".into()));
    }
    mu_star
        .iter()
        .map(|&mu| family.sampler_at_mean(mu))
        .collect()
}

/// Per-candidate estimates plus paired differences against candidate 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CrnComparison {
    pub estimates: Vec<UtilityEstimate>,
    /// `estimate[k] − estimate[0]`, with the standard error of the paired difference.
    pub versus_reference: Vec<UtilityEstimate>,
}

const BATCH: usize = 512;

/// Evaluates every candidate constraint on the same simulated scores.
/// Candidate 0 is the reference for the paired differences.
pub fn compare_constraints(
    family: &Family,
    mu_star: &[f64],
    candidates: &[Constraint],
    u: &UtilityFn,
    mc: &MonteCarlo,
) -> Result<CrnComparison> {
    mc.validate()?;
    u.validate()?;
    let samplers = item_samplers(family, mu_star)?;
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate rankings".into()));
    }
    for c in candidates {
        crate::error::check_len(mu_star.len(), c.len())?;
    }
    let k = candidates.len();
    let batches = mc.trials.div_ceil(BATCH);
    let partials: Vec<Result<(Vec<Running>, Vec<Running>)>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut values = vec![Running::default(); k];
            let mut diffs = vec![Running::default(); k];
            let mut x = vec![0.0; samplers.len()];
            let mut utils = vec![0.0; k];
            for t in b * BATCH..((b + 1) * BATCH).min(mc.trials) {
                let mut rng = substream(mc.seed, tag::UTILITY, t as u64, 0);
                for (xi, s) in x.iter_mut().zip(&samplers) {
                    *xi = s.sample_mean(mc.scores_per_item, &mut rng);
                }
                for (c, slot) in candidates.iter().zip(utils.iter_mut()) {
                    *slot = realized_utility(&fit(&x, c)?.mu_hat, u);
                }
                for j in 0..k {
                    values[j].push(utils[j]);
                    diffs[j].push(utils[j] - utils[0]);
                }
            }
            Ok((values, diffs))
        })
        .collect();

    let mut values = vec![Running::default(); k];
    let mut diffs = vec![Running::default(); k];
    for part in partials {
        let (v, d) = part?;
        for j in 0..k {
            values[j].merge(&v[j]);
            diffs[j].merge(&d[j]);
        }
    }
    let est = |r: &Running| UtilityEstimate {
        mean: r.mean(),
        std_error: r.std_error(),
        trials: mc.trials,
        seed: mc.seed,
    };
    Ok(CrnComparison {
        estimates: values.iter().map(est).collect(),
        versus_reference: diffs.iter().map(est).collect(),
    })
}

/// Monte-Carlo estimate of `E Σ U(μ̂ᵢ)` when `ranking` is reported.
pub fn expected_utility(
    family: &Family,
    mu_star: &[f64],
    ranking: &Ranking,
    u: &UtilityFn,
    mc: &MonteCarlo,
) -> Result<UtilityEstimate> {
    let cmp = compare_constraints(family, mu_star, &[Constraint::Ranking(ranking.clone())], u, mc)?;
    Ok(cmp.estimates[0])
}

/// As [`expected_utility`] for a coarse ranking.
pub fn expected_utility_coarse(
    family: &Family,
    mu_star: &[f64],
    blocks: &CoarseRanking,
    u: &UtilityFn,
    mc: &MonteCarlo,
) -> Result<UtilityEstimate> {
    let cmp = compare_constraints(family, mu_star, &[Constraint::Coarse(blocks.clone())], u, mc)?;
    Ok(cmp.estimates[0])
}

/// One row of an exhaustive utility comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedUtility<C> {
    pub report: C,
    pub estimate: UtilityEstimate,
    /// Paired difference against the truthful report (zero for the truthful row).
    pub versus_truthful: UtilityEstimate,
    pub truthful: bool,
}

pub const MAX_EXHAUSTIVE_ITEMS: usize = 8;

// `reports[0]` must be the truthful report.
fn ranked<C>(reports: Vec<C>, cmp: CrnComparison) -> Vec<RankedUtility<C>> {
    let mut rows: Vec<RankedUtility<C>> = reports
        .into_iter()
        .enumerate()
        .map(|(k, report)| RankedUtility {
            report,
            estimate: cmp.estimates[k],
            versus_truthful: cmp.versus_reference[k],
            truthful: k == 0,
        })
        .collect();
    rows.sort_by(|a, b| b.estimate.mean.total_cmp(&a.estimate.mean));
    rows
}

/// Estimates the utility of all `n!` rankings on common random numbers,
/// sorted from highest to lowest estimate.
pub fn rank_all_utilities(
    family: &Family,
    mu_star: &[f64],
    u: &UtilityFn,
    mc: &MonteCarlo,
) -> Result<Vec<RankedUtility<Ranking>>> {
    let n = mu_star.len();
    if n > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::TooLarge(format!(
            "{n}! rankings is too many to enumerate (limit n <= {MAX_EXHAUSTIVE_ITEMS}); \
             use expected_utility on selected rankings instead"
        )));
    }
    let truth = Ranking::by_descending(mu_star)?;
    let mut reports = vec![truth.clone()];
    reports.extend(Ranking::all(n).into_iter().filter(|r| *r != truth));
    let candidates: Vec<Constraint> = reports.iter().cloned().map(Constraint::Ranking).collect();
    let cmp = compare_constraints(family, mu_star, &candidates, u, mc)?;
    Ok(ranked(reports, cmp))
}

/// Estimates the utility of every coarse ranking whose block sizes are
/// `sizes`, sorted from highest to lowest estimate.
pub fn rank_all_coarse_utilities(
    family: &Family,
    mu_star: &[f64],
    sizes: &[usize],
    u: &UtilityFn,
    mc: &MonteCarlo,
) -> Result<Vec<RankedUtility<CoarseRanking>>> {
    let n = mu_star.len();
    if n > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::TooLarge(format!(
            "coarse enumeration limited to n <= {MAX_EXHAUSTIVE_ITEMS}, got {n}"
        )));
    }
    let truth = CoarseRanking::truthful(mu_star, sizes)?;
    let mut reports = vec![truth.clone()];
    reports.extend(
        CoarseRanking::all_with_sizes(sizes)?
            .into_iter()
            .filter(|c| *c != truth),
    );
    let candidates: Vec<Constraint> = reports.iter().cloned().map(Constraint::Coarse).collect();
    let cmp = compare_constraints(family, mu_star, &candidates, u, mc)?;
    Ok(ranked(reports, cmp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1(p: &[usize]) -> Ranking {
        Ranking::from_one_based(p).unwrap()
    }

    #[test]
    fn realized_utility_examples() {
        assert_eq!(realized_utility(&[1.0, 2.0], &UtilityFn::Identity), 3.0);
        assert_eq!(realized_utility(&[-1.0, 2.0], &UtilityFn::ReluSquare), 4.0);
        for u in [
            UtilityFn::ReluSquare,
            UtilityFn::Identity,
            UtilityFn::Hinge { t: 0.0 },
        ] {
            assert_eq!(realized_utility(&[0.0, 0.0, 0.0], &u), 0.0);
        }
    }

    #[test]
    fn utilities_are_nondecreasing_and_convex() {
        let kinds = [
            UtilityFn::ReluSquare,
            UtilityFn::Identity,
            UtilityFn::Exp { alpha: 0.7 },
            UtilityFn::Hinge { t: 1.5 },
        ];
        let h = 0.01;
        for u in kinds {
            for i in -400..400 {
                let x = i as f64 * 0.0125;
                let (a, b, c) = (u.eval(x - h), u.eval(x), u.eval(x + h));
                assert!(c >= b && b >= a, "{u:?} not monotone at {x}");
                assert!(a + c - 2.0 * b >= -1e-12, "{u:?} not convex at {x}");
            }
        }
    }

    #[test]
    fn utility_parsing() {
        assert_eq!("relu_square".parse::<UtilityFn>().unwrap(), UtilityFn::ReluSquare);
        assert_eq!("exp:0.5".parse::<UtilityFn>().unwrap(), UtilityFn::Exp { alpha: 0.5 });
        assert_eq!("hinge:2".parse::<UtilityFn>().unwrap(), UtilityFn::Hinge { t: 2.0 });
        assert!("exp:-1".parse::<UtilityFn>().is_err());
        assert!("exp".parse::<UtilityFn>().is_err());
        assert!("cubic".parse::<UtilityFn>().is_err());
    }

    #[test]
    fn noiseless_truthful_utility() {
        let f = Family::gaussian(1e-12).unwrap();
        let mu = [8.0, 7.0, 6.0, 4.0];
        let mc = MonteCarlo {
            trials: 2000,
            ..Default::default()
        };
        let e = expected_utility(&f, &mu, &Ranking::identity(4), &UtilityFn::ReluSquare, &mc).unwrap();
        let exact: f64 = mu.iter().map(|m| m * m).sum();
        assert!((e.mean - exact).abs() < 1e-4);
        assert_eq!((e.trials, e.seed), (2000, 0));
    }

    #[test]
    fn singleton_blocks_reproduce_full_ranking_exactly() {
        let f = Family::binomial(10).unwrap();
        let mu = [8.0, 7.0, 6.0, 4.0];
        let mc = MonteCarlo {
            trials: 3000,
            seed: 9,
            ..Default::default()
        };
        let r = r1(&[2, 1, 4, 3]);
        let a = expected_utility(&f, &mu, &r, &UtilityFn::ReluSquare, &mc).unwrap();
        let b = expected_utility_coarse(
            &f,
            &mu,
            &CoarseRanking::from_ranking(&r),
            &UtilityFn::ReluSquare,
            &mc,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_block_is_unconstrained() {
        let f = Family::Poisson;
        let mu = [3.0, 5.0];
        let mc = MonteCarlo {
            trials: 20_000,
            scores_per_item: 1,
            seed: 4,
        };
        let whole = CoarseRanking::new(vec![vec![0, 1]]).unwrap();
        let e = expected_utility_coarse(&f, &mu, &whole, &UtilityFn::Identity, &mc).unwrap();
        // E Σ X_i = Σ μ_i
        assert!((e.mean - 8.0).abs() < 5.0 * e.std_error + 1e-12);
    }

    #[test]
    fn crn_runs_are_bit_identical() {
        let f = Family::gamma(2.0).unwrap();
        let mu = [3.0, 2.0, 1.0];
        let mc = MonteCarlo {
            trials: 1500,
            seed: 77,
            ..Default::default()
        };
        let a = rank_all_utilities(&f, &mu, &UtilityFn::ReluSquare, &mc).unwrap();
        let b = rank_all_utilities(&f, &mu, &UtilityFn::ReluSquare, &mc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        assert_eq!(a.iter().filter(|r| r.truthful).count(), 1);
    }

    #[test]
    fn exhaustive_guards_and_errors() {
        let f = Family::Poisson;
        let u = UtilityFn::Identity;
        let mc = MonteCarlo {
            trials: 10,
            ..Default::default()
        };
        assert!(matches!(
            rank_all_utilities(&f, &[1.0; 9], &u, &mc),
            Err(Error::TooLarge(_))
        ));
        let one = rank_all_utilities(&f, &[2.0], &u, &mc).unwrap();
        assert_eq!(one.len(), 1);
        assert!(expected_utility(&f, &[-1.0], &Ranking::identity(1), &u, &mc).is_err());
        let zero = MonteCarlo { trials: 0, ..mc };
        assert!(expected_utility(&f, &[1.0], &Ranking::identity(1), &u, &zero).is_err());
    }
}
