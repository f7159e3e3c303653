use std::path::{Path, PathBuf};

use isomech::experiments::{
    build_lower_bound, estimation_error_curve, rate_check, read_authors, read_reviews,
    surrogate_eval, synthetic_icml_study, EstimationConfig, RateConfig, SyntheticConfig,
};
use isomech::isotonic::{
    coarse_isotonic_mechanism, coarse_to_permutation, isotonic_mechanism, ranking_constrained_mle,
    CoarseRanking, Ranking,
};
use isomech::mechanism::{rank_all_coarse_utilities, rank_all_utilities, RankedUtility};
use isomech::order::{majorizes, majorizes_natural_order, weakly_majorizes};
use isomech::MonteCarlo;
use serde_json::{json, Value};

use crate::config::{
    EstimationCliConfig, FitConfig, IcmlConfig, MajorizationConfig, MajorizationMode,
    MinimaxConfig, SyntheticCliConfig, TruthfulnessConfig,
};
use crate::io::{
    duplicates, open, read_assignment, read_scores, read_vector, Cell, Format, Table,
};
use crate::CliError;

/// What a command produced: the main body plus any extra files.
pub struct Output {
    pub body: Vec<u8>,
    pub extra: Vec<(PathBuf, Vec<u8>)>,
}

fn render(table: &Table, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => Ok((serde_json::to_string_pretty(&table.to_json())? + "\n").into_bytes()),
    }
}

fn single(body: Vec<u8>) -> Output {
    Output {
        body,
        extra: Vec::new(),
    }
}

pub fn fit(cfg: &FitConfig, format: Format) -> Result<Output, CliError> {
    let x = read_scores(&cfg.scores, &cfg.column)?;
    let n = x.len();
    let (mu_hat, ranking) = match (&cfg.ranking, &cfg.blocks) {
        (Some(_), Some(_)) => {
            return Err(CliError::Validation("give either --ranking or --blocks, not both".into()))
        }
        (Some(path), None) => {
            let ranks = read_assignment(path, "rank", n)?;
            if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > n) {
                return Err(CliError::Validation(format!(
                    "{}: rank {r} outside 1..={n}",
                    path.display()
                )));
            }
            if let Some(&r) = duplicates(&ranks).first() {
                return Err(CliError::Validation(format!(
                    "{}: rank {r} is given to more than one item",
                    path.display()
                )));
            }
            let mut perm = vec![0; n];
            for (i, &r) in ranks.iter().enumerate() {
                perm[r - 1] = i;
            }
            let pi = Ranking::new(perm)?;
            (isotonic_mechanism(&x, &pi)?.mu_hat, pi)
        }
        (None, Some(path)) => {
            let levels = read_assignment(path, "block", n)?;
            let blocks = CoarseRanking::from_levels(&levels)?;
            let pi = coarse_to_permutation(&blocks, &x)?;
            (coarse_isotonic_mechanism(&x, &blocks)?.mu_hat, pi)
        }
        (None, None) => {
            let pi = Ranking::identity(n);
            (isotonic_mechanism(&x, &pi)?.mu_hat, pi)
        }
    };
    let theta = match &cfg.family {
        Some(f) => {
            let mle = ranking_constrained_mle(f, &x, &ranking)?;
            debug_assert_eq!(mle.mu_hat, mu_hat);
            mle.theta_hat
        }
        None => None,
    };
    let mut table = Table::new(if theta.is_some() {
        &["index", "score", "adjusted", "theta_hat"]
    } else {
        &["index", "score", "adjusted"]
    });
    for i in 0..n {
        let mut row = vec![Cell::from(i + 1), x[i].into(), mu_hat[i].into()];
        if let Some(t) = &theta {
            row.push(t[i].into());
        }
        table.push(row);
    }
    Ok(single(render(&table, format)?))
}

fn utility_table<C: std::fmt::Display>(rows: &[RankedUtility<C>], label: &'static str) -> Table {
    let mut t = Table::new(&[label, "mean", "std_error", "diff_vs_truthful", "diff_std_error", "truthful"]);
    for r in rows {
        t.push(vec![
            Cell::Text(r.report.to_string()),
            r.estimate.mean.into(),
            r.estimate.std_error.into(),
            r.versus_truthful.mean.into(),
            r.versus_truthful.std_error.into(),
            Cell::Bool(r.truthful),
        ]);
    }
    t
}

pub fn truthfulness(cfg: &TruthfulnessConfig, format: Format) -> Result<Output, CliError> {
    let mc = MonteCarlo {
        scores_per_item: cfg.scores_per_item,
        trials: cfg.trials,
        seed: cfg.seed,
    };
    let table = match &cfg.coarse_sizes {
        None => utility_table(
            &rank_all_utilities(&cfg.family, &cfg.mu_star, &cfg.utility, &mc)?,
            "ranking",
        ),
        Some(sizes) => utility_table(
            &rank_all_coarse_utilities(&cfg.family, &cfg.mu_star, sizes, &cfg.utility, &mc)?,
            "blocks",
        ),
    };
    Ok(single(render(&table, format)?))
}

pub fn estimation(cfg: &EstimationCliConfig, format: Format) -> Result<Output, CliError> {
    let rep = estimation_error_curve(&EstimationConfig {
        family: cfg.family,
        n_grid: cfg.n_grid.clone(),
        mu_star: cfg.mu_star.clone(),
        scores_per_item: cfg.scores_per_item,
        trials: cfg.trials,
        seed: cfg.seed,
    })?;
    let mut t = Table::new(&["n", "mse_im", "se_im", "mse_raw", "se_raw", "se_diff"]);
    for r in &rep.rows {
        t.push(vec![
            r.n.into(),
            r.mse_im.into(),
            r.se_im.into(),
            r.mse_raw.into(),
            r.se_raw.into(),
            r.se_diff.into(),
        ]);
    }
    Ok(single(render(&t, format)?))
}

pub fn minimax(cfg: &MinimaxConfig, format: Format, out: Option<&Path>) -> Result<Output, CliError> {
    let bounds = cfg.effective_bounds()?;
    let rep = rate_check(&RateConfig {
        family: cfg.family,
        bounds,
        n_grid: cfg.n_grid.clone(),
        trials: cfg.trials,
        scores_per_item: cfg.scores_per_item,
        seed: cfg.seed,
    })?;
    log::info!("log-log slope {:.4}", rep.slope);
    let construction = match cfg.lower_bound_n {
        Some(n) => Some(build_lower_bound(&cfg.family, &bounds, n, cfg.c, cfg.seed)?),
        None => None,
    };
    let mut t = Table::new(&["n", "risk", "std_error", "risk_raw"]);
    for r in &rep.rows {
        t.push(vec![r.n.into(), r.risk.into(), r.std_error.into(), r.risk_raw.into()]);
    }
    let summary = json!({
        "rate": { "slope": rep.slope, "intercept": rep.intercept },
        "lower_bound": construction,
    });
    let construction_path = cfg.construction.clone().or_else(|| {
        out.map(|o| o.parent().unwrap_or(Path::new("")).join("construction.json"))
    });
    let (body, extra) = match (format, construction_path) {
        (Format::Json, None) => {
            let all = json!({ "rows": t.to_json(), "summary": summary });
            ((serde_json::to_string_pretty(&all)? + "\n").into_bytes(), Vec::new())
        }
        (_, path) => {
            let extra = match path {
                Some(p) => vec![(p, (serde_json::to_string_pretty(&summary)? + "\n").into_bytes())],
                None => {
                    log::warn!("no --out or construction path given; construction.json not written");
                    Vec::new()
                }
            };
            (render(&t, format)?, extra)
        }
    };
    Ok(Output { body, extra })
}

pub fn icml(cfg: &IcmlConfig, format: Format) -> Result<Output, CliError> {
    let reviews = read_reviews(open(&cfg.reviews)?)?;
    let authors = read_authors(open(&cfg.authors)?)?;
    let rep = surrogate_eval(&reviews, &authors, cfg.seed)?;
    log::info!(
        "{} authors evaluated; skipped {} submissions, {} malformed, {} uninformative, {} small authors",
        rep.authors.len(),
        rep.skipped_submissions,
        rep.skipped_malformed_authors,
        rep.skipped_uninformative_authors,
        rep.skipped_small_authors
    );
    let mut t = Table::new(&["n", "authors", "mse_raw", "mse_im", "improvement"]);
    for r in &rep.rows {
        t.push(vec![
            r.n.into(),
            r.authors.into(),
            r.mse_raw.into(),
            r.mse_im.into(),
            r.improvement.into(),
        ]);
    }
    let body = match format {
        Format::Csv => t.to_csv()?,
        Format::Json => (serde_json::to_string_pretty(&rep)? + "\n").into_bytes(),
    };
    Ok(single(body))
}

pub fn synthetic(cfg: &SyntheticCliConfig, format: Format) -> Result<Output, CliError> {
    let pool = read_vector(&cfg.pool)?;
    let rep = synthetic_icml_study(&SyntheticConfig {
        pool,
        n_grid: cfg.n_grid.clone(),
        trials: cfg.trials,
        seed: cfg.seed,
    })?;
    if let Some(rho) = rep.spearman {
        log::info!("spearman(n, improvement) = {rho:.3}");
    }
    let mut t = Table::new(&["n", "mean_im", "std_im", "mean_raw", "std_raw", "improvement"]);
    for r in &rep.rows {
        t.push(vec![
            r.n.into(),
            r.mean_im.into(),
            r.std_im.into(),
            r.mean_raw.into(),
            r.std_raw.into(),
            r.improvement.into(),
        ]);
    }
    Ok(single(render(&t, format)?))
}

pub fn check_majorization(cfg: &MajorizationConfig, format: Format) -> Result<Output, CliError> {
    let a = read_vector(&cfg.a)?;
    let b = read_vector(&cfg.b)?;
    let verdict = match cfg.mode {
        MajorizationMode::Standard => majorizes(&a, &b)?,
        MajorizationMode::Natural => majorizes_natural_order(&a, &b)?,
        MajorizationMode::Weak => weakly_majorizes(&a, &b)?,
    };
    let body = match format {
        Format::Csv => format!("{verdict}\n").into_bytes(),
        Format::Json => {
            let v: Value = json!({ "mode": cfg.mode, "majorizes": verdict });
            (serde_json::to_string_pretty(&v)? + "\n").into_bytes()
        }
    };
    Ok(single(body))
}
