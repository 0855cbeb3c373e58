//! `lipforge`: build, probe and verify non-differentiable 1-Lipschitz maps.

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Global, ProbeArgs};

#[derive(Parser)]
#[command(name = "lipforge", version, about = "Build, probe and verify non-differentiable 1-Lipschitz maps")]
struct Cli {
    /// Run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's output.dir, else ./lipforge-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed overriding game.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for witness verification
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write SVG plots
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the game and write the transcript, g_K and the nets
    Construct {
        /// Replay Player I's moves from a transcript
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Difference-quotient and Dini probes at transcript witnesses or a point
    Probe {
        /// Function to probe (default: the transcript's g_K)
        #[arg(long)]
        artifact: Option<PathBuf>,
        /// Game transcript supplying witnesses and operators
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Probe point, comma separated (without a transcript)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Vec<String>,
        /// Operator rows separated by ';', entries by ',' (without a transcript)
        #[arg(long, allow_hyphen_values = true)]
        op: Option<String>,
    },
    /// Run the invariant suites, on an artifact or transcript if given
    Verify {
        /// Function or transcript JSON (default: built-in stock suites)
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Evaluate an artifact on a grid of the domain
    Eval {
        /// Function JSON
        #[arg(long)]
        artifact: PathBuf,
        /// Grid spacing
        #[arg(long, default_value = "0.1")]
        step: String,
    },
    /// Write the nested nets of the configured target set
    Net {
        /// Number of levels (default: game.rounds)
        #[arg(long)]
        levels: Option<u32>,
    },
}

fn init_logging() {
    let level = match std::env::var("LIPFORGE_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    let g = Global { config: cli.config, out: cli.out, seed: cli.seed, plot: cli.plot };
    let result = match &cli.command {
        Command::Construct { replay } => commands::construct(&g, replay.as_deref()),
        Command::Probe { artifact, transcript, point, op } => commands::probe(
            &g,
            &ProbeArgs { artifact: artifact.as_deref(), transcript: transcript.as_deref(), point, op: op.as_deref() },
        ),
        Command::Verify { artifact } => commands::verify(&g, artifact.as_deref()),
        Command::Eval { artifact, step } => commands::eval(&g, artifact, step),
        Command::Net { levels } => commands::net(&g, *levels),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
