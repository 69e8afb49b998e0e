mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "plaus",
    version,
    about = "Experiments with plausibility functions over decision problems"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Digit file (decimal digits after the point); the bundled 10^5
    /// digits are used when absent.
    #[arg(long, global = true)]
    pi_digits: Option<PathBuf>,

    /// JSON object of default flag values; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected score per length.
    Score(commands::ScoreArgs),
    /// Per-length improvement verdicts for two forecasters.
    Compare(commands::CompareArgs),
    /// Grid check of a scoring rule's propriety.
    Propriety(commands::ProprietyArgs),
    /// Brier dominance of a forecast vector over a set of worlds.
    Dominance(commands::DominanceArgs),
    /// Gain series and arbitrage verdict for a buyer against a seller.
    Market(commands::MarketArgs),
    /// Verifies the pi digit-gap statements and the induction tail.
    GodelPi(commands::GodelPiArgs),
    /// Worst-case score over all instances of each length.
    WorstCaseDemo(commands::WorstCaseArgs),
    /// Runs every entry of a JSON experiment file.
    Batch(commands::BatchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    MonteCarlo,
}

/// Errors that map to exit status 2 without coming from the core library.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if let Some(e) = err.downcast_ref::<plaus_core::Error>() {
        let code = if e.is_unknown_identifier() {
            2
        } else if e.is_resource_guard() {
            3
        } else {
            1
        };
        return (code, e.kind());
    }
    if err.downcast_ref::<UsageError>().is_some() {
        return (2, "usage");
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return (1, "io");
    }
    (1, "error")
}

pub fn run(args: Vec<String>) -> anyhow::Result<()> {
    let args = config::merge(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            return Err(UsageError(e.to_string().trim().replace('\n', " ")).into())
        }
        Err(e) => {
            let _ = std::io::Write::write_all(&mut std::io::stdout(), e.to_string().as_bytes());
            return Ok(());
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs.unwrap_or(0))
        .build()?;
    pool.install(|| match cli.command {
        Command::Score(a) => commands::score(&cli.global, a),
        Command::Compare(a) => commands::compare(&cli.global, a),
        Command::Propriety(a) => commands::propriety(&cli.global, a),
        Command::Dominance(a) => commands::dominance(&cli.global, a),
        Command::Market(a) => commands::market(&cli.global, a),
        Command::GodelPi(a) => commands::godel_pi(&cli.global, a),
        Command::WorstCaseDemo(a) => commands::worst_case(&cli.global, a),
        Command::Batch(a) => commands::batch(&cli.global, a),
    })
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: kind={kind} msg={msg}");
            ExitCode::from(code)
        }
    }
}
