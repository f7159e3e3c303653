//! `isomech` command-line front end.

mod commands;
mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isomech::experiments::MuStarSpec;
use isomech::{Family, ScoreBounds, UtilityFn};
use serde_json::{json, Value};

use config::{resolve, MajorizationMode, Overrides};
use io::{emit, parse_floats, parse_grid, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Compute(String),
}

impl From<isomech::Error> for CliError {
    fn from(e: isomech::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

/// Isotonic Mechanism tools: adjust review scores with an author's ranking,
/// simulate truthfulness, and run estimation experiments.
///
/// Rankings are 1-based and list the best item first.
#[derive(Parser, Debug)]
#[command(name = "isomech", version)]
struct Cli {
    /// Random seed (falls back to ISOMECH_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo trials (per n where applicable).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// JSON config file or replay sidecar; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; a replay sidecar `<out>.json` is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Adjust scores with a ranking or blocks (index,score CSV in; index,score,adjusted out).
    Fit(FitArgs),
    /// Expected utility of every ranking (or coarse ranking) of the items.
    Truthfulness(TruthfulnessArgs),
    /// Estimation error of adjusted and raw scores against n.
    Estimation(EstimationArgs),
    /// Risk growth rate in n plus the lower-bound hypothesis construction.
    Minimax(MinimaxArgs),
    /// Surrogate-truth evaluation of review data (reviews.csv, authors.csv).
    Icml(IcmlArgs),
    /// Synthetic review study with true scores drawn from a pool.
    Synthetic(SyntheticArgs),
    /// Does vector a majorize vector b? Prints true or false.
    CheckMajorization(MajorizationArgs),
    /// Re-run a command from its JSON sidecar.
    Replay {
        sidecar: PathBuf,
    },
}

#[derive(Args, Debug)]
struct FitArgs {
    /// CSV with columns index and score (index is 1-based).
    scores: Option<PathBuf>,
    /// Column holding the scores.
    #[arg(long)]
    column: Option<String>,
    /// CSV with columns index,rank (rank 1 = best).
    #[arg(long)]
    ranking: Option<PathBuf>,
    /// CSV with columns index,block (block 1 = best; ties allowed).
    #[arg(long)]
    blocks: Option<PathBuf>,
    /// Family for natural parameters, e.g. binomial:10, gaussian:1, poisson, gamma:2.
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
}

#[derive(Args, Debug)]
struct TruthfulnessArgs {
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    /// True means, comma separated.
    #[arg(long, value_parser = parse_floats, allow_hyphen_values = true)]
    mu_star: Option<::std::vec::Vec<f64>>,
    /// relu_square, identity, exp:<alpha> or hinge:<t>.
    #[arg(long, value_parser = parse_utility)]
    utility: Option<UtilityFn>,
    #[arg(long)]
    scores_per_item: Option<usize>,
    /// Compare coarse rankings with these block sizes, e.g. 1,3.
    #[arg(long, value_parser = parse_grid)]
    coarse_sizes: Option<::std::vec::Vec<usize>>,
}

#[derive(Args, Debug)]
struct EstimationArgs {
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    /// Sizes, e.g. 10,20,50 or 10..=200:10.
    #[arg(long, value_parser = parse_grid)]
    n_grid: Option<::std::vec::Vec<usize>>,
    /// Linear ramp endpoints hi,lo.
    #[arg(long, value_parser = parse_floats, conflicts_with = "pool")]
    ramp: Option<::std::vec::Vec<f64>>,
    /// One-column CSV of true scores, resampled per trial.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    scores_per_item: Option<usize>,
}

#[derive(Args, Debug)]
struct MinimaxArgs {
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    /// Score bounds v_min,v_max.
    #[arg(long, value_parser = parse_floats, allow_hyphen_values = true)]
    bounds: Option<::std::vec::Vec<f64>>,
    #[arg(long, value_parser = parse_grid)]
    n_grid: Option<::std::vec::Vec<usize>>,
    #[arg(long)]
    scores_per_item: Option<usize>,
    /// Items in the lower-bound construction.
    #[arg(long)]
    lower_bound_n: Option<usize>,
    /// Skip the lower-bound construction.
    #[arg(long, conflicts_with = "lower_bound_n")]
    no_lower_bound: bool,
    /// Perturbation constant c (default C_var/16).
    #[arg(long)]
    c: Option<f64>,
    /// Path for construction.json (default: next to --out).
    #[arg(long)]
    construction: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IcmlArgs {
    reviews: Option<PathBuf>,
    authors: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SyntheticArgs {
    /// One-column CSV score pool (values in [0, 10]).
    pool: Option<PathBuf>,
    #[arg(long, value_parser = parse_grid)]
    n_grid: Option<::std::vec::Vec<usize>>,
}

#[derive(Args, Debug)]
struct MajorizationArgs {
    a: Option<PathBuf>,
    b: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<MajorizationMode>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: isomech::Error| e.to_string())
}

fn parse_utility(s: &str) -> Result<UtilityFn, String> {
    s.parse().map_err(|e: isomech::Error| e.to_string())
}

struct Globals {
    seed: Option<u64>,
    trials: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Compute(e.to_string()))?;
    }
    let globals = Globals {
        seed: cli.seed,
        trials: cli.trials,
    };
    let (name, config) = match cli.command {
        Command::Replay { sidecar } => {
            let text = std::fs::read_to_string(&sidecar).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", sidecar.display()))
            })?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", sidecar.display())))?;
            let name = v["command"]
                .as_str()
                .ok_or_else(|| CliError::Validation(format!("{}: no command", sidecar.display())))?
                .to_string();
            let format = cli.format.or_else(|| serde_json::from_value(v["format"].clone()).ok());
            return dispatch(&name, Some(&sidecar), Overrides::default(), &globals, format, cli.out.as_deref());
        }
        Command::Fit(a) => {
            let mut o = Overrides::default();
            o.set("scores", &a.scores)
                .set("column", &a.column)
                .set("ranking", &a.ranking)
                .set("blocks", &a.blocks)
                .set("family", &a.family);
            ("fit", o)
        }
        Command::Truthfulness(a) => {
            let mut o = Overrides::default();
            o.set("family", &a.family)
                .set("mu_star", &a.mu_star)
                .set("utility", &a.utility)
                .set("scores_per_item", &a.scores_per_item)
                .set("coarse_sizes", &a.coarse_sizes);
            ("truthfulness", o)
        }
        Command::Estimation(a) => {
            let mut o = Overrides::default();
            let spec = match (&a.ramp, &a.pool) {
                (Some(r), _) if r.len() == 2 => Some(MuStarSpec::LinearRamp { hi: r[0], lo: r[1] }),
                (Some(_), _) => {
                    return Err(CliError::Validation("--ramp takes two values hi,lo".into()))
                }
                (None, Some(p)) => Some(MuStarSpec::PoolResample {
                    pool: io::read_vector(p)?,
                }),
                (None, None) => None,
            };
            o.set("family", &a.family)
                .set("n_grid", &a.n_grid)
                .set("mu_star", &spec)
                .set("scores_per_item", &a.scores_per_item);
            ("estimation", o)
        }
        Command::Minimax(a) => {
            let mut o = Overrides::default();
            let bounds = match &a.bounds {
                Some(b) if b.len() == 2 => Some(ScoreBounds::new(b[0], b[1])?),
                Some(_) => {
                    return Err(CliError::Validation("--bounds takes two values v_min,v_max".into()))
                }
                None => None,
            };
            o.set("family", &a.family)
                .set("bounds", &bounds)
                .set("n_grid", &a.n_grid)
                .set("scores_per_item", &a.scores_per_item)
                .set("lower_bound_n", &a.lower_bound_n)
                .set("c", &a.c)
                .set("construction", &a.construction);
            if a.no_lower_bound {
                o.set("lower_bound_n", &Some(Value::Null));
            }
            ("minimax", o)
        }
        Command::Icml(a) => {
            let mut o = Overrides::default();
            o.set("reviews", &a.reviews).set("authors", &a.authors);
            ("icml", o)
        }
        Command::Synthetic(a) => {
            let mut o = Overrides::default();
            o.set("pool", &a.pool).set("n_grid", &a.n_grid);
            ("synthetic", o)
        }
        Command::CheckMajorization(a) => {
            let mut o = Overrides::default();
            o.set("a", &a.a).set("b", &a.b).set("mode", &a.mode);
            ("check-majorization", o)
        }
    };
    dispatch(name, cli.config.as_deref(), config, &globals, cli.format, cli.out.as_deref())
}

fn dispatch(
    name: &str,
    file: Option<&Path>,
    mut overrides: Overrides,
    globals: &Globals,
    format: Option<Format>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let format = format.unwrap_or(Format::Csv);
    let seeded = matches!(name, "truthfulness" | "estimation" | "minimax" | "icml" | "synthetic");
    let trialed = matches!(name, "truthfulness" | "estimation" | "minimax" | "synthetic");
    if seeded {
        overrides.set("seed", &globals.seed);
    } else if globals.seed.is_some() {
        log::debug!("{name} is deterministic; --seed ignored");
    }
    if trialed {
        overrides.set("trials", &globals.trials);
    } else if globals.trials.is_some() {
        log::warn!("{name} runs no simulation; --trials ignored");
    }
    let map = overrides.into_map();

    macro_rules! go {
        ($ty:ty, $run:expr) => {{
            let cfg: $ty = resolve(name, file, map)?;
            let output = $run(&cfg)?;
            let sidecar = json!({
                "command": name,
                "format": format,
                "version": env!("CARGO_PKG_VERSION"),
                "config": cfg,
            });
            (output, sidecar)
        }};
    }

    let (output, sidecar) = match name {
        "fit" => go!(config::FitConfig, |c| commands::fit(c, format)),
        "truthfulness" => go!(config::TruthfulnessConfig, |c| commands::truthfulness(c, format)),
        "estimation" => go!(config::EstimationCliConfig, |c| commands::estimation(c, format)),
        "minimax" => go!(config::MinimaxConfig, |c| commands::minimax(c, format, out)),
        "icml" => go!(config::IcmlConfig, |c| commands::icml(c, format)),
        "synthetic" => go!(config::SyntheticCliConfig, |c| commands::synthetic(c, format)),
        "check-majorization" => {
            go!(config::MajorizationConfig, |c| commands::check_majorization(c, format))
        }
        other => return Err(CliError::Validation(format!("unknown command {other:?}"))),
    };
    emit(&output.body, out, &sidecar)?;
    for (path, bytes) in output.extra {
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
