use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conucb_core::harness::{run_experiment, ExperimentSpec};
use conucb_core::{Error, ErrorCategory};

#[derive(Parser)]
#[command(name = "conucb", version, about = "Constrained two-level bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run policies on an instance and write averaged traces and a summary.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Arm table CSV with header `arm_id,a_mean,b_mean`.
    #[arg(long, conflicts_with = "synthetic")]
    arms: Option<PathBuf>,
    /// Synthetic generator: `uniform` or `conflicting`.
    #[arg(long)]
    synthetic: Option<String>,
    /// Number of arms.
    #[arg(long = "K")]
    num_arms: Option<usize>,
    /// Seed of the synthetic generator; defaults to `--seed`.
    #[arg(long)]
    instance_seed: Option<u64>,
    /// Arms selected per round.
    #[arg(long = "L")]
    size: Option<usize>,
    /// Threshold on the expected total attractiveness per round.
    #[arg(long = "h")]
    h: Option<f64>,
    /// Number of rounds.
    #[arg(long = "T")]
    horizon: Option<u64>,
    /// Confidence parameter in (0, 1).
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated: conucb, cucb, exp3m, oracle, uniform.
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    /// Independent runs to average.
    #[arg(long)]
    runs: Option<u64>,
    /// Base seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one trace row every this many rounds (and at T).
    #[arg(long)]
    stride: Option<u64>,
    /// Override Con-UCB's confidence scale (default 72 ln(8KT/delta)).
    #[arg(long)]
    gamma: Option<f64>,
}

impl RunArgs {
    fn spec(self) -> Result<ExperimentSpec, Error> {
        let base = match &self.config {
            Some(path) => ExperimentSpec::from_toml_file(path)?,
            None => ExperimentSpec::default(),
        };
        let flags = ExperimentSpec {
            arms: self.arms,
            synthetic: self.synthetic,
            num_arms: self.num_arms,
            instance_seed: self.instance_seed,
            size: self.size,
            h: self.h,
            horizon: self.horizon,
            delta: self.delta,
            policies: self.policies,
            runs: self.runs,
            seed: self.seed,
            out: self.out,
            stride: self.stride,
            gamma: self.gamma,
        };
        Ok(base.merge(flags))
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let config = args.spec()?.into_config()?;
    let summary = run_experiment(&config)?;
    println!(
        "K={} L={} h={} T={} runs={} optimal per-round reward {:.6}",
        summary.config.num_arms,
        summary.config.size,
        summary.config.h,
        summary.config.horizon,
        summary.config.runs,
        summary.config.optimal_value
    );
    for name in &summary.config.policies {
        let p = &summary.policies[name];
        println!(
            "{name:>8}  reward {:>12.2}  regret {:>12.2}  vio_horizon {:>10.2}  vio_clipped {:>10.2}  ratio {:>8.3}",
            p.cum_reward, p.cum_regret, p.vio_horizon, p.vio_clipped, p.ratio
        );
    }
    if let Some(dir) = &config.out_dir {
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Instance => 3,
        ErrorCategory::Io => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error ({}): {e}", category_name(category));
            ExitCode::from(exit_code(category))
        }
    }
}

fn category_name(category: ErrorCategory) -> &'static str {
    match category {
        ErrorCategory::Config => "config",
        ErrorCategory::Instance => "instance",
        ErrorCategory::Io => "io",
    }
}
