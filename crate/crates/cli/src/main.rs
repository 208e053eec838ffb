use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subembed_cli::commands;
use subembed_cli::{PipelineConfig, UsageError};

/// Divide a corpus, train sub-models asynchronously and merge them.
#[derive(Parser, Debug)]
#[command(name = "subembed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write one sub-corpus spec per sub-model.
    Divide,
    /// Train a sub-model for every spec.
    Train {
        /// Also train a model on the whole corpus.
        #[arg(long)]
        baseline: bool,
    },
    /// Merge the trained sub-models.
    Merge,
    /// Score a model on every benchmark file in a directory.
    Eval {
        /// Model to score (default: the merged model).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Results CSV (default: <out>/eval.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sub-corpus KL divergence, coverage and missing-word threshold.
    Stats,
    /// Remove benchmark words from sub-models and re-merge with each method.
    MissingWords,
    /// divide, train, merge and eval.
    Pipeline {
        #[arg(long)]
        baseline: bool,
    },
}

#[derive(Args, Debug)]
struct Opts {
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<String>,
    /// Sampling rate in percent.
    #[arg(long, global = true)]
    rate: Option<String>,
    /// equal, random or shuffle.
    #[arg(long, global = true)]
    strategy: Option<String>,
    #[arg(long, global = true)]
    dim: Option<String>,
    #[arg(long, global = true)]
    window: Option<String>,
    #[arg(long, global = true)]
    negatives: Option<String>,
    #[arg(long, global = true)]
    epochs: Option<String>,
    #[arg(long = "min-count", global = true)]
    min_count: Option<String>,
    #[arg(long = "max-vocab", global = true)]
    max_vocab: Option<String>,
    #[arg(long = "sub-min-count", global = true)]
    sub_min_count: Option<String>,
    /// Subsampling threshold; 0 disables.
    #[arg(long, global = true)]
    subsample: Option<String>,
    #[arg(long, global = true)]
    lr: Option<String>,
    /// Threads per sub-model.
    #[arg(long, global = true)]
    workers: Option<String>,
    /// Sub-models trained concurrently.
    #[arg(long, global = true)]
    jobs: Option<String>,
    /// concat, pca or alir.
    #[arg(long, global = true)]
    merge: Option<String>,
    /// random or pca.
    #[arg(long = "alir-init", global = true)]
    alir_init: Option<String>,
    #[arg(long = "alir-epochs", global = true)]
    alir_epochs: Option<String>,
    #[arg(long = "alir-threshold", global = true)]
    alir_threshold: Option<String>,
    #[arg(long = "alir-present-only", global = true)]
    alir_present_only: Option<String>,
    #[arg(long = "target-dim", global = true)]
    target_dim: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// Directory of benchmark files.
    #[arg(long, global = true)]
    benchmarks: Option<String>,
    #[arg(long = "removal-fraction", global = true)]
    removal_fraction: Option<String>,
    /// Comma-separated rates for stats.
    #[arg(long = "stats-rates", global = true)]
    stats_rates: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("corpus", &self.corpus),
            ("rate", &self.rate),
            ("strategy", &self.strategy),
            ("dim", &self.dim),
            ("window", &self.window),
            ("negatives", &self.negatives),
            ("epochs", &self.epochs),
            ("min-count", &self.min_count),
            ("max-vocab", &self.max_vocab),
            ("sub-min-count", &self.sub_min_count),
            ("subsample", &self.subsample),
            ("lr", &self.lr),
            ("workers", &self.workers),
            ("jobs", &self.jobs),
            ("merge", &self.merge),
            ("alir-init", &self.alir_init),
            ("alir-epochs", &self.alir_epochs),
            ("alir-threshold", &self.alir_threshold),
            ("alir-present-only", &self.alir_present_only),
            ("target-dim", &self.target_dim),
            ("seed", &self.seed),
            ("out", &self.out),
            ("benchmarks", &self.benchmarks),
            ("removal-fraction", &self.removal_fraction),
            ("stats-rates", &self.stats_rates),
        ]
    }

    fn build(&self) -> anyhow::Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = cli.opts.build()?;
    match cli.command {
        Command::Divide => {
            let paths = commands::cmd_divide(&cfg)?;
            println!("wrote {} spec files to {}", paths.len(), cfg.specs_dir().display());
        }
        Command::Train { baseline } => {
            let summary = commands::cmd_train(&cfg)?;
            for m in &summary.trained {
                println!("sub-model {}: {:.2}s -> {}", m.id, m.elapsed.as_secs_f64(), m.path.display());
            }
            if baseline {
                let elapsed = commands::cmd_baseline(&cfg)?;
                println!("full model: {:.2}s -> {}", elapsed.as_secs_f64(), cfg.baseline_path().display());
            }
        }
        Command::Merge => {
            let report = commands::cmd_merge(&cfg)?;
            println!(
                "{} merge: {} words -> {}",
                report.method,
                report.vocab_size,
                cfg.merged_path().display()
            );
        }
        Command::Eval { model, output } => {
            let model = model.unwrap_or_else(|| cfg.merged_path());
            let output = output.unwrap_or_else(|| cfg.out.join("eval.csv"));
            let rows = commands::cmd_eval(&model, cfg.benchmarks_path()?, &output, cfg.seed)?;
            print!("{}", commands::eval_csv(&rows));
        }
        Command::Stats => {
            let report = commands::cmd_stats(&cfg)?;
            println!(
                "{} KL rows, {} coverage rows -> {}",
                report.kl.len(),
                report.coverage.len(),
                cfg.stats_dir().display()
            );
        }
        Command::MissingWords => {
            let rows = commands::cmd_missing_words(&cfg)?;
            print!("{}", commands::missing_words_csv(&rows));
        }
        Command::Pipeline { baseline } => {
            cfg.baseline |= baseline;
            let summary = commands::cmd_pipeline(&cfg)?;
            println!(
                "{} sub-models trained, merged vocabulary {}",
                summary.train.trained.len(),
                summary.merge.as_ref().map_or(0, |r| r.vocab_size)
            );
            if !summary.eval.is_empty() {
                print!("{}", commands::eval_csv(&summary.eval));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
