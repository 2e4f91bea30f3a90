use std::path::PathBuf;

use clap::{Parser, Subcommand};

use fairbench_cli::config::{Config, Objective, OUTDIR_ENV};
use fairbench_cli::error::{CliError, EXIT_PARTIAL};
use fairbench_cli::{stages, Algorithm};

/// Benchmark fairness-aware classifiers on tabular datasets under a shared
/// preprocessing, split, and measurement protocol.
#[derive(Parser)]
#[command(name = "fairbench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key/value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for all stage artifacts.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,

    /// Directory holding the raw dataset files.
    #[arg(long, global = true)]
    datadir: Option<PathBuf>,

    /// Dataset to include (repeatable).
    #[arg(long = "dataset", global = true)]
    datasets: Vec<String>,

    /// Algorithm to include (repeatable).
    #[arg(long = "algorithm", global = true)]
    algorithms: Vec<String>,

    /// Preprocessing variant for the benchmark stage (repeatable).
    #[arg(long = "variant", global = true)]
    variants: Vec<String>,

    /// Sensitive attribute override, applied to every selected dataset
    /// (repeatable).
    #[arg(long = "sensitive", global = true)]
    sensitive: Vec<String>,

    /// Number of random train/test splits.
    #[arg(long, global = true)]
    splits: Option<usize>,

    /// Master seed for splits and synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the benchmark stage.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Parameter handling: report_all, best_accuracy, or best_di.
    #[arg(long, global = true)]
    objective: Option<String>,

    /// Whether baselines see the sensitive attribute as a feature.
    #[arg(long = "sensitive-as-feature", global = true)]
    sensitive_as_feature: Option<bool>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean raw data, write the processed variants and split plans.
    Preprocess,
    /// Train and evaluate every configured (dataset, variant, sensitive,
    /// algorithm, parameter, split) cell.
    Benchmark,
    /// Summarize results: stability, measure correlations, tradeoffs, and
    /// variant comparisons.
    Analyze,
    /// Run all three stages in order.
    All,
}

fn build_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Config::default(),
    };
    if config.outdir == PathBuf::from("out") {
        if let Ok(env_dir) = std::env::var(OUTDIR_ENV) {
            if !env_dir.is_empty() {
                config.outdir = PathBuf::from(env_dir);
            }
        }
    }
    if let Some(dir) = &cli.outdir {
        config.outdir = dir.clone();
    }
    if let Some(dir) = &cli.datadir {
        config.datadir = dir.clone();
    }
    if !cli.datasets.is_empty() {
        config.datasets = cli.datasets.clone();
    }
    if !cli.algorithms.is_empty() {
        config.algorithms = cli
            .algorithms
            .iter()
            .map(|a| Algorithm::parse(a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if !cli.variants.is_empty() {
        config.variants = cli
            .variants
            .iter()
            .map(|v| fairbench_core::preprocess::VariantTag::parse(v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if !cli.sensitive.is_empty() {
        for dataset in config.datasets.clone() {
            config.sensitive.insert(dataset, cli.sensitive.clone());
        }
    }
    if let Some(n) = cli.splits {
        config.n_splits = n;
    }
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if let Some(objective) = &cli.objective {
        config.objective =
            Objective::parse(objective).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(flag) = cli.sensitive_as_feature {
        config.sensitive_as_feature = flag;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let config = build_config(cli)?;
    let mut exit = 0;
    let stages_to_run: Vec<&str> = match cli.command {
        Command::Preprocess => vec!["preprocess"],
        Command::Benchmark => vec!["benchmark"],
        Command::Analyze => vec!["analyze"],
        Command::All => vec!["preprocess", "benchmark", "analyze"],
    };
    for stage in stages_to_run {
        match stage {
            "preprocess" => {
                for line in stages::cmd_preprocess(&config)? {
                    println!("{line}");
                }
            }
            "benchmark" => {
                let (lines, failed) = stages::cmd_benchmark(&config)?;
                for line in lines {
                    println!("{line}");
                }
                if failed > 0 {
                    eprintln!("{failed} cells failed; see the cells/ directory for details");
                    exit = EXIT_PARTIAL;
                }
            }
            "analyze" => {
                for line in stages::cmd_analyze(&config)? {
                    println!("{line}");
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(exit)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
