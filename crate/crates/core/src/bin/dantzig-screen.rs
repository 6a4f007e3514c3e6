use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dantzig_screen::pipeline::{run_screen, RunConfig};
use dantzig_screen::selection::Scoring;
use dantzig_screen::{ScreenError, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScoringArg {
    Plugin,
    Refit,
}

/// Screen predictors of a binary response with the LP Dantzig selector.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Input CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Name of the binary response column.
    #[arg(long)]
    response: String,
    /// Number of delta grid points.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest selected fraction of the variables allowed when choosing delta.
    #[arg(long, default_value_t = 0.25)]
    cap: f64,
    #[arg(long, value_enum, default_value_t = ScoringArg::Plugin)]
    scoring: ScoringArg,
    /// Refine the model at the chosen delta by successive linear programming.
    #[arg(long, default_value_t = false)]
    slp: bool,
    #[arg(long, default_value_t = 1e-8)]
    zero_tol: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also write profile.svg and cv_auc.svg.
    #[arg(long, default_value_t = false)]
    svg: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let config = RunConfig {
        input: args.input,
        response: args.response,
        grid: args.grid,
        folds: args.folds,
        seed: args.seed,
        cap_fraction: args.cap,
        scoring: match args.scoring {
            ScoringArg::Plugin => Scoring::PlugIn,
            ScoringArg::Refit => Scoring::Refit,
        },
        zero_tol: args.zero_tol,
        slp: args.slp,
        out: args.out,
        svg: args.svg,
    };
    match run_screen(&config) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn error_record(e: &ScreenError) -> String {
    serde_json::json!({
        "error": e.kind(),
        "code": e.exit_code(),
        "message": e.to_string(),
    })
    .to_string()
}
