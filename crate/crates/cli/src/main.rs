mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use failure::Failure;
use profilereg::model::ModelConfig;

#[derive(Parser, Debug)]
#[command(name = "profilereg", version, about = "Profile-conditioned referring expression generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write train/dev/test manifests
    Split(Common),
    /// Train the generator and save a checkpoint
    Train(Common),
    /// Greedy-decode a partition into a predictions file
    Generate(Common),
    /// Score a predictions file
    Evaluate(Common),
    /// Predictions from the OnlyName or Ferreira baseline
    Baseline(Common),
    /// Finite-difference check of the loss gradient on a toy model
    Gradcheck(Common),
    /// Per-form mean switch probabilities
    Stats(Common),
}

/// Flags shared by every subcommand. Each one is shorthand for a
/// `--set key=value` and wins over the config file.
#[derive(Args, Debug)]
struct Common {
    /// `key = value` settings file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    profiles: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long = "split-dir")]
    split_dir: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    predictions: Option<String>,
    #[arg(long)]
    embeddings: Option<String>,
    /// train, dev, test or all
    #[arg(long)]
    partition: Option<String>,
    /// Keep only samples of this gold form
    #[arg(long)]
    form: Option<String>,
    /// original, entity or random
    #[arg(long)]
    kind: Option<String>,
    /// Split seed
    #[arg(long)]
    seed: Option<String>,
    /// onlyname or ferreira
    #[arg(long)]
    which: Option<String>,
    /// char or token
    #[arg(long)]
    granularity: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, &String)> {
        [
            ("samples", &self.samples),
            ("profiles", &self.profiles),
            ("output", &self.output),
            ("split_dir", &self.split_dir),
            ("model_dir", &self.model),
            ("predictions", &self.predictions),
            ("embeddings", &self.embeddings),
            ("partition", &self.partition),
            ("form_filter", &self.form),
            ("split_kind", &self.kind),
            ("split_seed", &self.seed),
            ("baseline", &self.which),
            ("granularity", &self.granularity),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }

    /// Defaults, then the config file, then `--set`, then flags.
    fn resolve(&self, base: RunConfig) -> Result<RunConfig, Failure> {
        let mut cfg = base;
        if let Some(file) = &self.config {
            cfg.apply_file(file)?;
        }
        for a in &self.set {
            cfg.apply_assignment(a)?;
        }
        for (k, v) in self.flags() {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let toy = RunConfig { model: ModelConfig::toy(), ..RunConfig::default() };
    match cli.command {
        Command::Split(c) => commands::split(&c.resolve(RunConfig::default())?),
        Command::Train(c) => commands::train(&c.resolve(RunConfig::default())?),
        Command::Generate(c) => commands::generate(&c.resolve(RunConfig::default())?),
        Command::Evaluate(c) => commands::evaluate_cmd(&c.resolve(RunConfig::default())?),
        Command::Baseline(c) => commands::baseline(&c.resolve(RunConfig::default())?),
        Command::Gradcheck(c) => commands::gradcheck(&c.resolve(toy)?),
        Command::Stats(c) => commands::stats(&c.resolve(RunConfig::default())?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("profilereg: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
