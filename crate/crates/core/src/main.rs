use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use femtoreuse::config::ExperimentConfig;
use femtoreuse::experiment::{self, Experiment};
use femtoreuse::Error;

/// Femtocell outage experiments under four frequency allocation schemes.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// fig5, fig6 or son-ablation.
        #[arg(long)]
        experiment: Experiment,
        /// Output path [default: <experiment>.csv].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; does not change the results.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the configuration without running anything.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        experiment: Option<Experiment>,
    },
    /// Print the effective configuration.
    PrintConfig {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// key = value config file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override one key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn load(&self) -> femtoreuse::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            config.apply_override(kv)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            common,
            experiment,
            out,
            workers,
        } => {
            let config = common.load()?;
            config.validate()?;
            let rows = match workers {
                Some(w) => experiment::run_with_workers(experiment, &config, w)?,
                None => experiment::run(experiment, &config)?,
            };
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{experiment}.csv")));
            experiment::write_csv_file(&out, &rows, experiment, &config)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Validate { common, experiment } => {
            common.load()?.validate()?;
            match experiment {
                Some(e) => println!("ok ({e})"),
                None => println!("ok"),
            }
        }
        Command::PrintConfig { common } => {
            print!("{}", common.load()?.to_config_string());
        }
    }
    Ok(())
}
