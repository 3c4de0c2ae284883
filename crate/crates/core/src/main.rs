use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use htp_core::experiments::{run_drift, run_suite, DriftConfig, Preset, Rule, Study, TrialOutput};
use htp_core::io::config::{ResolvedRun, DEFAULT_OUT_DIR, DEFAULT_SEED};
use htp_core::io::{self, snapshot, Overrides, RunConfig};
use htp_core::{Error, Result};

/// Simulator of reward-modulated learning with delayed rewards.
#[derive(Parser)]
#[command(name = "htp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Three scenarios followed by a revisit of the first.
    Run {
        #[command(flatten)]
        common: Common,
        /// Continue from a snapshot instead of starting fresh.
        #[arg(long, value_name = "PATH")]
        resume: Option<PathBuf>,
    },
    /// Repeated runs with consecutive seeds and aggregated statistics.
    Suite(Common),
    /// The checkerboard scenarios.
    Checker(Common),
    /// One scenario held for an extended period.
    Stability(Common),
    /// Scalar weight under three phases of random updates.
    Drift(ScalarArgs),
    /// Scalar two-component weight learned and then unlearned.
    Unlearn(ScalarArgs),
    /// Print the resolved configuration as JSON.
    ValidateConfig(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    rule: Option<Rule>,
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Worker threads for multi-trial runs, 0 for one per core.
    #[arg(long, value_name = "N", default_value_t = 0)]
    parallel: usize,
}

#[derive(Args, Clone)]
struct ScalarArgs {
    #[arg(long, value_name = "N", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_name = "DIR", default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
}

impl Common {
    fn resolve(&self, study: Study, default_trials: usize) -> Result<ResolvedRun> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let over = Overrides {
            preset: self.preset,
            rule: self.rule,
            seed: self.seed,
            trials: self.trials.or(file.trials).or(Some(default_trials)),
            out_dir: self.out.clone(),
        };
        file.resolve(study, &over)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run { common, resume: Some(path) } => resume_trial(&common, &path),
        Command::Run { common, resume: None } => experiment(&common, Study::Run, 1),
        Command::Suite(common) => experiment(&common, Study::Run, 10),
        Command::Checker(common) => experiment(&common, Study::Checker, 1),
        Command::Stability(common) => experiment(&common, Study::Stability, 1),
        Command::Drift(args) => scalar(&args, DriftConfig::drift(args.seed)),
        Command::Unlearn(args) => scalar(&args, DriftConfig::unlearning(args.seed)),
        Command::ValidateConfig(common) => {
            let run = common.resolve(Study::Run, 1)?;
            let text = serde_json::to_string_pretty(&run)?;
            // A closed pipe is not an error for a printing command.
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

fn experiment(common: &Common, study: Study, default_trials: usize) -> Result<()> {
    let run = common.resolve(study, default_trials)?;
    io::create_dir(&run.out_dir)?;
    io::write_json(&run.out_dir.join("config.json"), &run)?;
    let template = run.trial.clone();
    let make = |seed| {
        let mut cfg = template.clone();
        cfg.seed = seed;
        Ok(cfg)
    };
    let suite = run_suite(make, run.trials, run.trial.seed, common.parallel)?;
    if run.trials == 1 {
        report(&run.out_dir, &suite.trials[0])?;
    } else {
        let mut summaries = Vec::with_capacity(run.trials);
        for out in &suite.trials {
            let dir = run.out_dir.join(format!("trial_{}", out.simulation.config.seed));
            summaries.push(io::write_trial(&dir, out)?);
        }
        io::write_aggregate(&run.out_dir.join("aggregate.csv"), &suite.aggregate)?;
        io::write_json(&run.out_dir.join("summary.json"), &summaries)?;
    }
    println!("wrote {}", run.out_dir.display());
    Ok(())
}

fn report(dir: &Path, out: &TrialOutput) -> Result<()> {
    let summary = io::write_trial(dir, out)?;
    eprintln!(
        "seed {}: {} rewards, mean rewarded weight {:.3}, mean other {:.4}",
        summary.seed, summary.rewards_total, summary.mean_rewarded, summary.mean_nonrewarded
    );
    Ok(())
}

fn resume_trial(common: &Common, path: &Path) -> Result<()> {
    if common.config.is_some() || common.seed.is_some() || common.rule.is_some() || common.preset.is_some() {
        return Err(Error::config("resume", "the snapshot carries its own configuration"));
    }
    let mut simulation = snapshot::load(path)?.state;
    let mut series = simulation.empty_series();
    simulation.advance(u64::MAX, &mut series)?;
    let out_dir = common.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    report(&out_dir, &TrialOutput { series, simulation })?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn scalar(args: &ScalarArgs, cfg: DriftConfig) -> Result<()> {
    let rows = run_drift(&cfg)?;
    io::create_dir(&args.out)?;
    let path = args.out.join("drift.csv");
    io::write_drift(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
