use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use replay_harness::config::ExperimentConfig;
use replay_harness::error::{HarnessError, Result};
use replay_harness::{audit, compare, experiment, metrics, plot, report};

#[derive(Parser)]
#[command(name = "replay-bench", version, about = "Compare replay sampling strategies for Q-learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write per-run and merged metrics CSVs.
    Run(Sweep),
    /// Summarize a merged metrics CSV by strategy group.
    Compare {
        /// Merged metrics CSV.
        input: PathBuf,
        /// Directory for summary.csv and wins.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check empirical sampling frequencies against the analytic distribution.
    Audit {
        #[command(flatten)]
        sweep: Sweep,
        /// Drop one slot from the cluster index before auditing.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Cluster occupancy of a memory filled by a random policy.
    ClusterReport(Sweep),
    /// Render reward curves from a merged metrics CSV as SVG.
    Plot {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value = "mean reward over the last 100 episodes")]
        title: String,
    },
    /// Print the effective configuration.
    ShowConfig(Sweep),
}

#[derive(Args)]
struct Sweep {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated strategies.
    #[arg(long)]
    strategy: Option<String>,
    /// Comma-separated betas for distribution-aware sampling.
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated seeds or a range `a..b`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    episodes: Option<String>,
    #[arg(long)]
    buffer_size: Option<String>,
    #[arg(long)]
    clusterer: Option<String>,
    #[arg(long)]
    clusters: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Sweep {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("env", &self.env),
            ("strategies", &self.strategy),
            ("betas", &self.beta),
            ("seeds", &self.seeds),
            ("episodes", &self.episodes),
            ("buffer_size", &self.buffer_size),
            ("clusterer", &self.clusterer),
            ("clusters", &self.clusters),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            config.set(k.trim(), v.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(sweep) => {
            let config = sweep.resolve()?;
            let results = experiment::run_sweep(&config)?;
            let files = experiment::write_sweep(&config.out, &results)?;
            println!("wrote {} run files and {}", files.runs.len(), files.merged.display());
            let rows = metrics::read_rows(&files.merged)?;
            print!("{}", compare::compare(&rows)?.table());
        }
        Command::Compare { input, out } => {
            let c = compare::compare(&metrics::read_rows(&input)?)?;
            print!("{}", c.table());
            if let Some(dir) = out {
                c.write(&dir)?;
            }
        }
        Command::Audit { sweep, inject_fault } => {
            let config = sweep.resolve()?;
            let results = audit::run_audit(&config, inject_fault)?;
            print!("{}", audit::render(&results));
            audit::check(&results)?;
        }
        Command::ClusterReport(sweep) => {
            let config = sweep.resolve()?;
            let memory = audit::random_memory(&config)?;
            print!("{}", report::render(&report::cluster_report(memory.index())));
        }
        Command::Plot { input, output, title } => {
            let series = plot::series(&metrics::read_rows(&input)?)?;
            let svg = plot::render_svg(&series, &title)?;
            std::fs::write(&output, svg).map_err(|e| HarnessError::io(&output, e))?;
            println!("wrote {} ({} series)", output.display(), series.len());
        }
        Command::ShowConfig(sweep) => print!("{}", sweep.resolve()?.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
