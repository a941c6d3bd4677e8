//! `deferbench`: run deferral experiments and summarize their traces.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use defer_core::experiment::{self, ExperimentConfig};
use defer_core::policy::FeedbackMode;

#[derive(Parser)]
#[command(name = "deferbench", version, about = "Budgeted human/model deferral experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict to one feedback mode.
        #[arg(long, value_enum)]
        feedback: Option<Feedback>,
    },
    /// Rebuild summary.csv from the trace files in a directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Feedback {
    Full,
    Bandit,
}

fn run(cli: Cli) -> defer_core::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            trials,
            seed,
            feedback,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = trials {
                cfg.experiment.trials = Some(n);
            }
            if let Some(s) = seed {
                cfg.experiment.seed = s;
            }
            if let Some(f) = feedback {
                cfg.experiment.feedback = vec![match f {
                    Feedback::Full => FeedbackMode::FullInformation,
                    Feedback::Bandit => FeedbackMode::PureBandit,
                }];
            }
            cfg.validate()?;
            let out = out
                .or_else(|| cfg.experiment.out.clone())
                .ok_or_else(|| defer_core::Error::Config("no output directory: pass --out or set experiment.out".into()))?;
            let report = experiment::run(&cfg, &out)?;
            println!(
                "wrote {} traces and summary.csv to {}",
                report.trace_files,
                report.out_dir.display()
            );
            Ok(())
        }
        Command::Summarize { input } => {
            let rows = experiment::summarize(&input)?;
            print!("{}", experiment::summary_csv(&rows));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("deferbench: error: {}", e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
