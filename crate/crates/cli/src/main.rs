use std::path::PathBuf;
use std::process::ExitCode;

use catforge::config::Scenario;
use catforge::error::{CliError, CliResult};
use catforge::manifest::Status;
use catforge::reproduce::{reproduce, Profile, SUMMARY_FILE};
use catforge::scenario::run;
use catforge::ExperimentConfig;
use clap::builder::PossibleValuesParser;
use clap::Parser;

const THREADS_ENV: &str = "CATFORGE_THREADS";
const REPRODUCE: &str = "reproduce";

fn command_names() -> Vec<&'static str> {
    Scenario::ALL
        .iter()
        .map(|s| s.name())
        .chain([REPRODUCE])
        .collect()
}

/// Heralded optical cat-state experiments.
#[derive(Debug, Parser)]
#[command(name = "catforge", version)]
struct Args {
    /// Scenario to run, or `reproduce` for every figure dataset.
    #[arg(value_parser = PossibleValuesParser::new(command_names()))]
    command: String,

    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration value, e.g. `physics.g_mag=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Coarse sampling for `reproduce`.
    #[arg(long)]
    quick: bool,

    /// Worker threads; defaults to $CATFORGE_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(THREADS_ENV, format!("not a thread count: `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn execute(args: Args) -> CliResult<()> {
    if let Some(n) = thread_count(args.threads)? {
        if n == 0 {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config("threads", e.to_string()))?;
    }

    if args.command == REPRODUCE {
        if args.config.is_some() || !args.set.is_empty() {
            return Err(CliError::config("reproduce", "takes no --config or --set"));
        }
        let dir = args.out.unwrap_or_else(|| PathBuf::from("reproduce"));
        let profile = if args.quick {
            Profile::Quick
        } else {
            Profile::Full
        };
        let report = reproduce(&dir, profile)?;
        let count = |s: Status| report.summary.iter().filter(|r| r.status == s).count();
        println!(
            "{}: {} pass, {} fail, {} informational",
            dir.join(SUMMARY_FILE).display(),
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Untargeted)
        );
        for r in report.summary.iter().filter(|r| r.status == Status::Fail) {
            println!("  fail {} = {}", r.id, r.computed);
        }
        for (job, msg) in &report.failures {
            eprintln!("job {job} failed: {msg}");
        }
        return Ok(());
    }

    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = vec![format!("scenario=\"{}\"", args.command)];
    overrides.extend(args.set);
    let mut config = ExperimentConfig::parse(&text, &overrides)?;
    if let Some(out) = args.out {
        config.output.dir = out;
    }
    let out = run(&config)?;
    println!(
        "{}: {} records, {} artifacts",
        config.output.dir.display(),
        out.records.len(),
        out.artifacts.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catforge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
