//! Peer-review evaluations.
//!
//! `surrogate_eval` scores real review data: for each submission the least
//! confident review plays the observed score and the mean of the remaining
//! reviews stands in for the true quality. `synthetic_icml_study` draws true
//! qualities from a score pool instead and simulates averaged Binomial(10)
//! reviews.
//!
//! File formats (UTF-8 CSV with header):
//!
//! ```text
//! reviews.csv   submission_id,score,confidence
//! authors.csv   author_id,submission_ids,ranking
//!               a1,s1;s4;s9,2;1;3
//! ```
//!
//! `ranking` gives each listed submission's position, 1 = best. Repeated
//! positions are ties and turn the report into a coarse ranking.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truthful_trial;
use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::isotonic::{coarse_isotonic_mechanism, CoarseRanking, Ranking};
use crate::rng::{substream, tag};
use crate::stats::{mean, spearman, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub submission_id: String,
    pub score: f64,
    pub confidence: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub author_id: String,
    pub submission_ids: Vec<String>,
    /// Position of each submission, 1 = best.
    pub ranking: Vec<usize>,
}

#[derive(Deserialize)]
struct AuthorRow {
    author_id: String,
    submission_ids: String,
    ranking: String,
}

pub fn read_reviews<R: Read>(reader: R) -> Result<Vec<ReviewRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let rec: ReviewRecord = row?;
        if !rec.score.is_finite() {
            return Err(Error::InvalidInput(format!(
                "review of {} has non-finite score",
                rec.submission_id
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_authors<R: Read>(reader: R) -> Result<Vec<AuthorRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (line, row) in rdr.deserialize::<AuthorRow>().enumerate() {
        let row = row?;
        let ids: Vec<String> = row
            .submission_ids
            .split(';')
            .map(|s| s.trim().to_string())
            .collect();
        let ranking = row
            .ranking
            .split(';')
            .map(|s| {
                s.trim().parse::<usize>().map_err(|e| {
                    Error::InvalidInput(format!(
                        "authors line {}: bad ranking entry {s:?}: {e}",
                        line + 2
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(AuthorRecord {
            author_id: row.author_id,
            submission_ids: ids,
            ranking,
        });
    }
    Ok(out)
}

pub fn write_reviews<W: Write>(writer: W, reviews: &[ReviewRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in reviews {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_authors<W: Write>(writer: W, authors: &[AuthorRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["author_id", "submission_ids", "ranking"])?;
    for a in authors {
        let rank: Vec<String> = a.ranking.iter().map(|r| r.to_string()).collect();
        w.write_record([
            a.author_id.clone(),
            a.submission_ids.join(";"),
            rank.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A random pick among equally unconfident reviews.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieChoice {
    pub submission_id: String,
    /// 0-based position of the chosen review among the submission's reviews,
    /// in file order.
    pub chosen: usize,
    pub candidates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorResult {
    pub author_id: String,
    pub n: usize,
    pub mse_raw: f64,
    pub mse_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRow {
    pub n: usize,
    pub authors: usize,
    /// `None` when no author has `n` usable submissions.
    pub mse_raw: Option<f64>,
    pub mse_im: Option<f64>,
    pub improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateReport {
    pub seed: u64,
    pub rows: Vec<SurrogateRow>,
    pub authors: Vec<AuthorResult>,
    pub tie_choices: Vec<TieChoice>,
    /// Submissions with fewer than two reviews.
    pub skipped_submissions: usize,
    pub skipped_malformed_authors: usize,
    pub skipped_uninformative_authors: usize,
    /// Authors left with fewer than two usable submissions.
    pub skipped_small_authors: usize,
}

struct Surrogate {
    observed: f64,
    truth: f64,
}

/// Per-author MSEs of the raw least-confident score and of the mechanism,
/// both against the surrogate truth, averaged by number of submissions.
pub fn surrogate_eval(
    reviews: &[ReviewRecord],
    authors: &[AuthorRecord],
    seed: u64,
) -> Result<SurrogateReport> {
    let mut by_submission: BTreeMap<&str, Vec<&ReviewRecord>> = BTreeMap::new();
    for r in reviews {
        by_submission.entry(r.submission_id.as_str()).or_default().push(r);
    }

    let mut surrogates: BTreeMap<&str, Surrogate> = BTreeMap::new();
    let mut tie_choices = Vec::new();
    let mut skipped_submissions = 0;
    for (idx, (&id, revs)) in by_submission.iter().enumerate() {
        if revs.len() < 2 {
            skipped_submissions += 1;
            continue;
        }
        let least = revs.iter().map(|r| r.confidence).min().unwrap();
        let candidates: Vec<usize> = (0..revs.len())
            .filter(|&j| revs[j].confidence == least)
            .collect();
        let chosen = if candidates.len() == 1 {
            candidates[0]
        } else {
            let mut rng = substream(seed, tag::SURROGATE, idx as u64, 0);
            let c = candidates[rng.random_range(0..candidates.len())];
            tie_choices.push(TieChoice {
                submission_id: id.to_string(),
                chosen: c,
                candidates: candidates.clone(),
            });
            c
        };
        let rest: Vec<f64> = (0..revs.len())
            .filter(|&j| j != chosen)
            .map(|j| revs[j].score)
            .collect();
        surrogates.insert(
            id,
            Surrogate {
                observed: revs[chosen].score,
                truth: mean(&rest),
            },
        );
    }
    if skipped_submissions > 0 {
        log::info!("skipped {skipped_submissions} submissions with fewer than two reviews");
    }

    let mut results = Vec::new();
    let (mut malformed, mut uninformative, mut small) = (0, 0, 0);
    for a in authors {
        let unique: HashSet<&String> = a.submission_ids.iter().collect();
        if a.submission_ids.len() != a.ranking.len()
            || unique.len() != a.submission_ids.len()
            || a.ranking.contains(&0)
        {
            log::warn!("author {}: malformed ranking, skipped", a.author_id);
            malformed += 1;
            continue;
        }
        let usable: Vec<(usize, &Surrogate)> = a
            .submission_ids
            .iter()
            .zip(&a.ranking)
            .filter_map(|(id, &pos)| surrogates.get(id.as_str()).map(|s| (pos, s)))
            .collect();
        if usable.len() < 2 {
            small += 1;
            continue;
        }
        let levels: Vec<usize> = usable.iter().map(|u| u.0).collect();
        if levels.iter().all(|&l| l == levels[0]) {
            log::warn!("author {}: all submissions tied, skipped", a.author_id);
            uninformative += 1;
            continue;
        }
        let blocks = CoarseRanking::from_levels(&levels)?;
        let x: Vec<f64> = usable.iter().map(|u| u.1.observed).collect();
        let truth: Vec<f64> = usable.iter().map(|u| u.1.truth).collect();
        let mu_hat = coarse_isotonic_mechanism(&x, &blocks)?.mu_hat;
        let n = x.len();
        let mse = |v: &[f64]| -> f64 {
            v.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n as f64
        };
        results.push(AuthorResult {
            author_id: a.author_id.clone(),
            n,
            mse_raw: mse(&x),
            mse_im: mse(&mu_hat),
        });
    }

    let max_n = results.iter().map(|r| r.n).max().unwrap_or(1);
    let rows = (2..=max_n)
        .map(|n| {
            let group: Vec<&AuthorResult> = results.iter().filter(|r| r.n == n).collect();
            if group.is_empty() {
                return SurrogateRow {
                    n,
                    authors: 0,
                    mse_raw: None,
                    mse_im: None,
                    improvement: None,
                };
            }
            let raw = mean(&group.iter().map(|r| r.mse_raw).collect::<Vec<_>>());
            let im = mean(&group.iter().map(|r| r.mse_im).collect::<Vec<_>>());
            SurrogateRow {
                n,
                authors: group.len(),
                mse_raw: Some(raw),
                mse_im: Some(im),
                improvement: (raw > 0.0).then(|| (raw - im) / raw),
            }
        })
        .collect();

    Ok(SurrogateReport {
        seed,
        rows,
        authors: results,
        tie_choices,
        skipped_submissions,
        skipped_malformed_authors: malformed,
        skipped_uninformative_authors: uninformative,
        skipped_small_authors: small,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub pool: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRow {
    pub n: usize,
    pub mean_im: f64,
    pub std_im: f64,
    pub mean_raw: f64,
    pub std_raw: f64,
    /// `(mean_raw − mean_im) / mean_raw`.
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticReport {
    pub config: SyntheticConfig,
    pub rows: Vec<SyntheticRow>,
    /// Rank correlation between `n` and the improvement.
    pub spearman: Option<f64>,
}

const SYNTHETIC_TRIALS_PER_REVIEW: usize = 3;

fn check_pool(pool: &[f64]) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::InvalidInput("score pool is empty".into()));
    }
    if let Some(v) = pool.iter().find(|v| !(0.0..=10.0).contains(*v)) {
        return Err(Error::InvalidInput(format!(
            "pool value {v} outside [0, 10]"
        )));
    }
    Ok(())
}

/// Per-trial `(MSE_IM, MSE_raw)` for authors of `n` submissions whose true
/// qualities are drawn from `pool`, each observed as the mean of three
/// Binomial(10, μ/10) reviews.
pub fn synthetic_trials(pool: &[f64], n: usize, trials: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_pool(pool)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let family = Family::binomial(10)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, tag::SYNTHETIC, n as u64, t as u64);
            let mu: Vec<f64> = (0..n)
                .map(|_| pool[rng.random_range(0..pool.len())])
                .collect();
            let (im, raw) = truthful_trial(&family, &mu, SYNTHETIC_TRIALS_PER_REVIEW, &mut rng)?;
            Ok((im / n as f64, raw / n as f64))
        })
        .collect()
}

pub fn synthetic_icml_study(cfg: &SyntheticConfig) -> Result<SyntheticReport> {
    check_pool(&cfg.pool)?;
    if cfg.n_grid.is_empty() || cfg.trials < 2 {
        return Err(Error::InvalidInput(
            "need a nonempty n-grid and at least 2 trials".into(),
        ));
    }
    let rows = cfg
        .n_grid
        .iter()
        .map(|&n| {
            let t = synthetic_trials(&cfg.pool, n, cfg.trials, cfg.seed)?;
            let im = Summary::of(&t.iter().map(|p| p.0).collect::<Vec<_>>());
            let raw = Summary::of(&t.iter().map(|p| p.1).collect::<Vec<_>>());
            Ok(SyntheticRow {
                n,
                mean_im: im.mean,
                std_im: im.std,
                mean_raw: raw.mean,
                std_raw: raw.std,
                improvement: if raw.mean > 0.0 {
                    (raw.mean - im.mean) / raw.mean
                } else {
                    0.0
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let imp: Vec<f64> = rows.iter().map(|r| r.improvement).collect();
    Ok(SyntheticReport {
        config: cfg.clone(),
        spearman: spearman(&ns, &imp),
        rows,
    })
}

/// Synthetic review data in the ICML format: `authors_per_n[j] = (n, count)`
/// asks for `count` authors with `n` submissions each. True qualities are
/// uniform on `[2, 8]`; each submission gets 3 to 5 integer reviews drawn
/// from Binomial(10, μ/10) with confidences in 1..=5, and authors report
/// the truthful ranking.
pub fn generate_icml_fixture(
    authors_per_n: &[(usize, usize)],
    seed: u64,
) -> Result<(Vec<ReviewRecord>, Vec<AuthorRecord>)> {
    let family = Family::binomial(10)?;
    let mut rng = substream(seed, tag::FIXTURE, 0, 0);
    let mut reviews = Vec::new();
    let mut authors = Vec::new();
    let mut next_sub = 0usize;
    for &(n, count) in authors_per_n {
        if n == 0 {
            return Err(Error::InvalidInput("authors need at least one submission".into()));
        }
        for _ in 0..count {
            let mu: Vec<f64> = (0..n).map(|_| rng.random_range(2.0..8.0)).collect();
            let mut ids = Vec::with_capacity(n);
            for &m in &mu {
                let id = format!("s{next_sub}");
                next_sub += 1;
                let sampler = family.sampler_at_mean(m)?;
                for _ in 0..rng.random_range(3..=5) {
                    reviews.push(ReviewRecord {
                        submission_id: id.clone(),
                        score: sampler.sample(&mut rng),
                        confidence: rng.random_range(1..=5),
                    });
                }
                ids.push(id);
            }
            let positions = Ranking::by_descending(&mu)?.positions();
            authors.push(AuthorRecord {
                author_id: format!("a{}", authors.len()),
                submission_ids: ids,
                ranking: positions.iter().map(|p| p + 1).collect(),
            });
        }
    }
    Ok((reviews, authors))
}
