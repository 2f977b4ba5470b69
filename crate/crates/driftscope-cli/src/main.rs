//! Command-line front end for the dataset-difference explanation toolkit.
//!
//! Exit codes: 0 success, 1 validation error, 2 computation error,
//! 3 provider error.

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use commands::CommandError;
use config::{Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "driftscope", version)]
#[command(about = "Explain the differences between two comparable datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for report.json, report.md, and plot data.
    #[arg(long)]
    out: PathBuf,

    /// Dataset D (CSV, or a text corpus for `attributes`).
    #[arg(long)]
    d: Option<PathBuf>,

    /// Dataset D' in the same format as D.
    #[arg(long = "d-prime")]
    d_prime: Option<PathBuf>,

    /// Label column name for labeled pipelines.
    #[arg(long)]
    label_column: Option<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Number of influential examples to select.
    #[arg(long = "top-k")]
    top_k: Option<usize>,

    /// Number of k-means prototypes.
    #[arg(long = "k-prototypes")]
    k_prototypes: Option<usize>,

    /// Distance metric: euclidean | cosine.
    #[arg(long)]
    metric: Option<String>,

    /// Completion provider: mock | mock-echo | http.
    #[arg(long)]
    provider: Option<String>,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Mixture generator case (1 = equal proportions, 2 = Dirichlet).
    #[arg(long)]
    case: Option<usize>,

    /// Run the humanize rewrite pass (attributes).
    #[arg(long)]
    humanize: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            d_path: self.d.clone(),
            d_prime_path: self.d_prime.clone(),
            label_column: self.label_column.clone(),
            seed: self.seed,
            top_k: self.top_k,
            k_prototypes: self.k_prototypes,
            metric: self.metric.clone(),
            provider: self.provider.clone(),
            workers: self.workers,
            mixture_case: self.case,
            humanize: self.humanize.then_some(true),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prototype-based comparison: NSPD/NSDD and partial prototypes.
    Prototypes(RunArgs),
    /// Influential-example explanation over intrinsic feature importances.
    Influence(RunArgs),
    /// LLM attribute percentages and separability for text corpora.
    Attributes(RunArgs),
    /// Metrics, sweeps, and synthetic benchmark generators.
    Eval {
        #[command(subcommand)]
        which: EvalCommand,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Faithfulness of partial prototypes as K shrinks.
    Faithfulness(RunArgs),
    /// Rank/value tradeoff over sampled scoring coefficients.
    Tradeoff(RunArgs),
    /// Influence scores against the leave-one-out retraining oracle.
    ValidateInfluence(RunArgs),
    /// Paired circle Gaussian-mixture datasets with ground truth.
    GenMixture(RunArgs),
}

fn configure_workers(config: &RunConfig) {
    if let Some(workers) = config.workers {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
}

fn dispatch(
    args: &RunArgs,
    run: impl FnOnce(&RunConfig, &std::path::Path) -> Result<report::ExplanationReport, CommandError>,
) -> Result<(), CommandError> {
    let config = RunConfig::resolve(args.config.as_deref(), &args.overrides())?;
    configure_workers(&config);
    run(&config, &args.out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prototypes(args) => dispatch(args, commands::prototypes::run),
        Command::Influence(args) => dispatch(args, commands::influence::run),
        Command::Attributes(args) => dispatch(args, commands::attributes::run),
        Command::Eval { which } => match which {
            EvalCommand::Faithfulness(args) => dispatch(args, commands::eval::run_faithfulness),
            EvalCommand::Tradeoff(args) => dispatch(args, commands::eval::run_tradeoff),
            EvalCommand::ValidateInfluence(args) => {
                dispatch(args, commands::eval::run_validate_influence)
            }
            EvalCommand::GenMixture(args) => dispatch(args, commands::eval::run_gen_mixture),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftscope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
