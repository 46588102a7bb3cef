//! `roadside`: plan roadside LiDAR/radar placements and evaluate them.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use roadside_core::Error;

use commands::{
    CoverageArgs, EvaluateArgs, ExportMilpArgs, FuseArgs, OptimizeArgs, PipelineArgs, SimulateArgs, Usage,
    VisibilityArgs,
};

#[derive(Parser, Debug)]
#[command(name = "roadside", version, about = "Roadside LiDAR/radar placement planning and evaluation")]
struct Cli {
    /// TOML file with one table per subcommand (e.g. `[optimize]`). Keys are
    /// the long flag names with `_` for `-`. Flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel stages. Outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ray-cast visibility matrices for every candidate mount.
    Visibility(VisibilityArgs),
    /// Choose sensors under the budget from two visibility matrices.
    Optimize(OptimizeArgs),
    /// Central coverage and cost of one or more placements.
    Coverage(CoverageArgs),
    /// Simulate traffic and per-modality detections for a placement.
    Simulate(SimulateArgs),
    /// Late-fuse lidar and radar detection files.
    Fuse(FuseArgs),
    /// Per-class AP and mAP of detections against ground truth.
    Evaluate(EvaluateArgs),
    /// End-to-end comparison of the configurations in a pipeline file.
    Pipeline(PipelineArgs),
    /// Write the placement model in LP format.
    ExportMilp(ExportMilpArgs),
}

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_GUARD: u8 = 5;
const EXIT_IO: u8 = 6;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::Parse { .. } | Error::Version { .. }) => EXIT_PARSE,
        Some(Error::Invalid(_) | Error::IndexOutOfRange { .. } | Error::NoEvaluableClasses(_)) => EXIT_VALIDATION,
        Some(Error::TooLarge(_)) => EXIT_GUARD,
        Some(Error::Io { .. }) => EXIT_IO,
        _ => EXIT_INTERNAL,
    }
}

/// Context chain down to the first library error, whose message already
/// includes its own causes.
fn describe(err: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in err.chain() {
        parts.push(cause.to_string());
        if cause.downcast_ref::<Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = commands::Context { config: cli.config, workers: workers.max(1) };
    let result = match cli.command {
        Command::Visibility(a) => commands::visibility(&ctx, a),
        Command::Optimize(a) => commands::optimize(&ctx, a),
        Command::Coverage(a) => commands::coverage(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Fuse(a) => commands::fuse(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Pipeline(a) => commands::pipeline(&ctx, a),
        Command::ExportMilp(a) => commands::export_milp(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
