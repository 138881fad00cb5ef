//! `hdopt`: analyze and optimize the weight-streaming bit flips of quantized
//! layers, simulate optimized plans, and emit deployment artifacts.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hdopt_core::{ErrorClass, HdError};

#[derive(Debug, Parser)]
#[command(
    name = "hdopt",
    version,
    about = "Bit-flip minimization for weight streaming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report flips (HD) and normalized HD of a weight bundle, optionally under a plan.
    Analyze {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        plan: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Reorder output channels as a single segment.
    Reorder {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Greedy start channels to try (0, 1, ...); the identity order is always a candidate.
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Exhaustive optimum instead of greedy (at most 12 channels).
        #[arg(long)]
        exact: bool,
    },
    /// Split columns into contiguous segments and reorder each one.
    Segment {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 8)]
        width: usize,
        #[arg(long)]
        exact: bool,
    },
    /// Cluster input channels into segments and reorder each cluster.
    Cluster(ClusterArgs),
    /// Stream a plan through the array model and report flips, outputs and energy.
    Simulate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        plan: PathBuf,
        #[arg(short, long)]
        acts: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Emit the accumulator address LUT for a plan.
    EmitLut {
        #[arg(short, long)]
        plan: PathBuf,
        #[arg(short = 'D', long, default_value_t = 1024)]
        depth: usize,
        #[arg(short, long)]
        output: PathBuf,
        /// Emit the previous layer's channel-emission table for this (next-layer) plan instead.
        #[arg(long)]
        input_permutation: bool,
    },
    /// Apply a single-segment plan to a layer and the matching columns of the next layer.
    Relayout {
        #[arg(short = '1', long = "first")]
        first: PathBuf,
        #[arg(short = '2', long = "second")]
        second: PathBuf,
        #[arg(short, long)]
        plan: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random-weight benchmark over a list of layer shapes.
    Bench(bench::BenchArgs),
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Number of clusters; defaults to ceil(C / width).
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub exact: bool,
    /// Where to write the objective trace; defaults to `<output>.trace.json`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Validation => 1,
        ErrorClass::Io => 2,
        ErrorClass::Infeasible => 3,
    }
}

fn configure_threads() -> Result<(), HdError> {
    let Ok(raw) = std::env::var("HDOPT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        HdError::InvalidArgument(format!(
            "HDOPT_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| HdError::InvalidArgument(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| run(cli.command));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn run(command: Command) -> Result<String, HdError> {
    match command {
        Command::Analyze {
            input,
            plan,
            format,
        } => commands::analyze(&input, plan.as_deref(), format),
        Command::Reorder {
            input,
            output,
            restarts,
            exact,
        } => commands::reorder(&input, &output, restarts, exact),
        Command::Segment {
            input,
            output,
            width,
            exact,
        } => commands::segment(&input, &output, width, exact),
        Command::Cluster(args) => commands::cluster(&args),
        Command::Simulate {
            input,
            plan,
            acts,
            config,
            format,
        } => commands::simulate(&input, &plan, &acts, config.as_deref(), format),
        Command::EmitLut {
            plan,
            depth,
            output,
            input_permutation,
        } => commands::emit_lut(&plan, depth, &output, input_permutation),
        Command::Relayout {
            first,
            second,
            plan,
            output,
        } => commands::relayout(&first, &second, &plan, &output),
        Command::Bench(args) => bench::run(&args),
    }
}
