use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truthful_trial;
use crate::error::{Error, Result};
use crate::expfam::{Family, ScoreBounds};
use crate::rng::{substream, tag};
use crate::stats::{linear_fit, Summary};

/// How the true means are produced for a given number of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuStarSpec {
    /// `μᵢ = hi − (hi − lo)(i − 1)/(n − 1)`.
    LinearRamp { hi: f64, lo: f64 },
    /// Fresh draw with replacement from `pool` on every trial.
    PoolResample { pool: Vec<f64> },
    /// A fixed vector; only valid for `n == values.len()`.
    Explicit { values: Vec<f64> },
}

impl Default for MuStarSpec {
    fn default() -> Self {
        MuStarSpec::LinearRamp { hi: 9.0, lo: 3.0 }
    }
}

impl MuStarSpec {
    fn check(&self, family: &Family, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let vals: Vec<f64> = match self {
            MuStarSpec::LinearRamp { hi, lo } => {
                if n < 2 {
                    return bad(format!("linear ramp needs n >= 2, got {n}"));
                }
                vec![*hi, *lo]
            }
            MuStarSpec::PoolResample { pool } => {
                if pool.is_empty() {
                    return bad("score pool is empty".into());
                }
                pool.clone()
            }
            MuStarSpec::Explicit { values } => {
                if values.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: values.len(),
                    });
                }
                values.clone()
            }
        };
        if let Some(v) = vals.iter().find(|&&v| !family.is_admissible_mean(v)) {
            return Err(Error::InvalidParameter(format!(
                "true mean {v} lies outside the mean range of {family}"
            )));
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match self {
            MuStarSpec::LinearRamp { hi, lo } => (0..n)
                .map(|i| hi - (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
            MuStarSpec::PoolResample { pool } => (0..n)
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect(),
            MuStarSpec::Explicit { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub family: Family,
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub mu_star: MuStarSpec,
    pub scores_per_item: usize,
    pub trials: usize,
    pub seed: u64,
}

impl EstimationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidInput("n-grid is empty".into()));
        }
        if self.trials < 2 || self.scores_per_item == 0 {
            return Err(Error::InvalidInput(
                "need at least 2 trials and 1 score per item".into(),
            ));
        }
        for &n in &self.n_grid {
            if n == 0 {
                return Err(Error::InvalidInput("n-grid entries must be positive".into()));
            }
            self.mu_star.check(&self.family, n)?;
        }
        Ok(())
    }
}

/// Per-coordinate errors at one `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationRow {
    pub n: usize,
    /// Mean of `‖μ̂ − μ⋆‖²/n`.
    pub mse_im: f64,
    pub se_im: f64,
    /// Mean of `‖X − μ⋆‖²/n`.
    pub mse_raw: f64,
    pub se_raw: f64,
    /// Standard error of the paired difference `mse_raw − mse_im`.
    pub se_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub config: EstimationConfig,
    pub rows: Vec<EstimationRow>,
}

fn per_trial_errors(
    family: &Family,
    spec: &MuStarSpec,
    n: usize,
    spi: usize,
    trials: usize,
    seed: u64,
    stream_tag: u64,
) -> Result<Vec<(f64, f64)>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, stream_tag, n as u64, t as u64);
            let mu = spec.generate(n, &mut rng);
            truthful_trial(family, &mu, spi, &mut rng)
        })
        .collect()
}

/// Monte-Carlo estimation error of the mechanism (truthful ranking) and of
/// the raw averaged scores, per `n`.
pub fn estimation_error_curve(cfg: &EstimationConfig) -> Result<EstimationReport> {
    cfg.validate()?;
    let rows = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let errs = per_trial_errors(
                &cfg.family,
                &cfg.mu_star,
                n,
                cfg.scores_per_item,
                cfg.trials,
                cfg.seed,
                tag::ESTIMATION,
            )?;
            let nf = n as f64;
            let im: Vec<f64> = errs.iter().map(|e| e.0 / nf).collect();
            let raw: Vec<f64> = errs.iter().map(|e| e.1 / nf).collect();
            let diff: Vec<f64> = errs.iter().map(|e| (e.1 - e.0) / nf).collect();
            let (im, raw, diff) = (Summary::of(&im), Summary::of(&raw), Summary::of(&diff));
            Ok(EstimationRow {
                n,
                mse_im: im.mean,
                se_im: im.std_error,
                mse_raw: raw.mean,
                se_raw: raw.std_error,
                se_diff: diff.std_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimationReport {
        config: cfg.clone(),
        rows,
    })
}

fn default_spi() -> usize {
    1
}

/// Settings for fitting the growth rate of the total risk in `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub family: Family,
    pub bounds: ScoreBounds,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_spi")]
    pub scores_per_item: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    /// Monte-Carlo mean of `‖μ̂ − μ⋆‖²`.
    pub risk: f64,
    pub std_error: f64,
    /// Monte-Carlo mean of `‖X − μ⋆‖²`.
    pub risk_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub config: RateConfig,
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log risk` against `log n`.
    pub slope: f64,
    pub intercept: f64,
}

/// Total risk of the mechanism on a linear ramp spanning the score bounds,
/// with the log-log slope across the grid. The ramp stands in for the
/// worst case over the isotonic cone.
pub fn rate_check(cfg: &RateConfig) -> Result<RateReport> {
    cfg.family.check_bounds(&cfg.bounds)?;
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    if grid.len() < 2 || grid[0] < 2 || grid[grid.len() - 1] < 10 * grid[0] {
        return Err(Error::InvalidInput(format!(
            "rate check needs >= 2 sizes spanning a decade with n >= 2, got {:?}",
            cfg.n_grid
        )));
    }
    if cfg.trials < 2 || cfg.scores_per_item == 0 {
        return Err(Error::InvalidInput(
            "need at least 2 trials and 1 score per item".into(),
        ));
    }
    let spec = MuStarSpec::LinearRamp {
        hi: cfg.bounds.v_max,
        lo: cfg.bounds.v_min,
    };
    let rows = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let errs = per_trial_errors(
                &cfg.family,
                &spec,
                n,
                cfg.scores_per_item,
                cfg.trials,
                cfg.seed,
                tag::RATE,
            )?;
            let im: Vec<f64> = errs.iter().map(|e| e.0).collect();
            let raw: Vec<f64> = errs.iter().map(|e| e.1).collect();
            let s = Summary::of(&im);
            Ok(RateRow {
                n,
                risk: s.mean,
                std_error: s.std_error,
                risk_raw: Summary::of(&raw).mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| r.risk <= 0.0) {
        return Err(Error::ConstructionFailed(
            "zero risk at some n; log-log fit undefined".into(),
        ));
    }
    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.risk.ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly)
        .ok_or_else(|| Error::InvalidInput("degenerate n-grid".into()))?;
    Ok(RateReport {
        config: cfg.clone(),
        rows,
        slope,
        intercept,
    })
}
