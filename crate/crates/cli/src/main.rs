use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smartpde::experiment::{self, ExperimentConfig, Method};
use smartpde::Error;

/// Adversarially augmented training for PDE surrogates.
#[derive(Parser)]
#[command(name = "smartpde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reference problems and sample the training datasets.
    GenData(Common),
    /// Train surrogates and write checkpoints, histories and metrics.
    Train(Common),
    /// Attack a trained checkpoint over a range of budgets.
    AttackEval(Common),
    /// Aggregate metrics over seeds and compute gains against `standard`.
    Compare(Common),
    /// gen-data, train and compare in one go.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Restrict to one method (standard, smart, lpsda, gcda, lpsda+smart).
    #[arg(long)]
    method: Option<String>,
    /// Restrict to one training-set size.
    #[arg(long)]
    size: Option<usize>,
    /// Restrict to one seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall-clock time out of histories so outputs are byte-identical.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    deterministic: bool,
}

impl Common {
    fn load(&self) -> smartpde::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(m) = &self.method {
            let m: Method = m.parse()?;
            if !m.valid_for(cfg.task) {
                return Err(Error::InvalidConfig(format!("method `{m}` does not apply to `{}`", cfg.task)));
            }
            cfg.methods = vec![m];
        }
        if let Some(n) = self.size {
            if n == 0 {
                return Err(Error::InvalidConfig("--size must be positive".into()));
            }
            cfg.sizes = vec![n];
        }
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        Ok(cfg)
    }
}

fn runs(cfg: &ExperimentConfig) -> impl Iterator<Item = (Method, usize, u64)> + '_ {
    cfg.methods
        .iter()
        .flat_map(move |&m| cfg.sizes.iter().flat_map(move |&n| cfg.seeds.iter().map(move |&s| (m, n, s))))
}

fn execute(command: Command) -> smartpde::Result<()> {
    match command {
        Command::GenData(c) => {
            let cfg = c.load()?;
            for path in experiment::gen_data(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Train(c) => {
            let cfg = c.load()?;
            for (m, n, s) in runs(&cfg) {
                let out = experiment::train_run(&cfg, m, n, s, c.deterministic)?;
                println!("{} n={n} seed={s} rmse={:.6e}", m, out.metrics.rmse);
            }
        }
        Command::AttackEval(c) => {
            let cfg = c.load()?;
            for (m, n, s) in runs(&cfg) {
                let (path, _) = experiment::attack_eval(&cfg, m, n, s, None)?;
                println!("{}", path.display());
            }
        }
        Command::Compare(c) => {
            let cfg = c.load()?;
            experiment::compare(&cfg)?;
            println!("{}", cfg.compare_dir().join("gains.csv").display());
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            experiment::run_all(&cfg, c.deterministic)?;
            println!("{}", cfg.compare_dir().join("gains.csv").display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::InvalidConfig(_) => 2,
        Error::UnstableConfig(_) => 3,
        Error::DivergedLoss { .. } => 4,
        Error::ShapeMismatch(_) => 5,
        Error::MissingRun(_) => 6,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
