use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_vlc::run::{execute, resolve_out_dir, summary_lines, write_artifacts, RunError};
use ris_vlc::scenario::{
    bundled_names, bundled_scenario, load_scenario, Scenario, ScenarioError, Violation,
};

/// Steering, diffraction and transmittance model of reconfigurable-surface
/// receivers for visible light links.
#[derive(Debug, Parser)]
#[command(name = "ris-vlc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (defaults to $RIS_VLC_OUT, then ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output format of result tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Print nothing but errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one geometry and wave.
    Eval(ScenarioArg),
    /// Sweep a parameter and tabulate a metric.
    Sweep(ScenarioArg),
    /// Solve an inverse design target.
    Design(ScenarioArg),
    /// Rotation bench comparing receiver front ends.
    Bench(ScenarioArg),
    /// Run the bundled figure and table scenarios.
    Figures {
        /// Run only these bundled scenarios.
        #[arg(long, value_name = "NAME")]
        only: Vec<String>,
        /// List the bundled scenarios and exit.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Args)]
struct ScenarioArg {
    /// Scenario JSON file, or the name of a bundled scenario.
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
}

fn resolve_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    if !path.exists() {
        if let Some(name) = path.to_str() {
            let stem = name.strip_suffix(".json").unwrap_or(name);
            if bundled_names().any(|n| n == stem) {
                return bundled_scenario(stem);
            }
        }
    }
    load_scenario(path)
}

fn check_mode(scenario: &Scenario, command: &str) -> Result<(), ScenarioError> {
    let mode = scenario.mode.name();
    if mode == command {
        return Ok(());
    }
    Err(ScenarioError::Invalid {
        origin: scenario.name.clone(),
        violations: vec![Violation {
            path: String::new(),
            message: format!("this is a {mode} scenario; run it with `ris-vlc {mode}`"),
        }],
    })
}

fn run_one(scenario: &Scenario, out_dir: &Path, quiet: bool) -> Result<(), RunError> {
    let output = execute(scenario)?;
    let written = write_artifacts(&output, out_dir)?;
    if !quiet {
        if let Some(text) = &output.text {
            print!("{text}");
        }
        for line in summary_lines(&output, &written) {
            println!("{line}");
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let Format::Csv = cli.format;
    let out_dir = resolve_out_dir(cli.out.as_deref());
    match &cli.command {
        Command::Figures { only, list } => {
            if *list {
                for name in bundled_names() {
                    println!("{name}");
                }
                return Ok(());
            }
            let names: Vec<String> = if only.is_empty() {
                bundled_names().map(str::to_owned).collect()
            } else {
                only.clone()
            };
            for name in &names {
                run_one(&bundled_scenario(name)?, &out_dir, cli.quiet)?;
            }
            Ok(())
        }
        Command::Eval(arg) | Command::Sweep(arg) | Command::Design(arg) | Command::Bench(arg) => {
            let command = match cli.command {
                Command::Eval(_) => "eval",
                Command::Sweep(_) => "sweep",
                Command::Design(_) => "design",
                _ => "bench",
            };
            let scenario = resolve_scenario(&arg.scenario)?;
            check_mode(&scenario, command)?;
            run_one(&scenario, &out_dir, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
