//! Command-line front end: run simulations, execute studies, compare the two
//! junction solvers. A thin shell over the `gasnet` drivers; every command is
//! reachable through the library with identical artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gasnet::config::{parse_with_overrides, LoadedConfig};
use gasnet::output;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "gasnet", version, about = "Isentropic gas dynamics on networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. --override sim.t_end=2.0 (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (defaults to the config's snapshot_dir, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write snapshot and monitor CSVs.
    Run(Common),
    /// Grid-convergence study over the configured dx levels.
    Converge(Common),
    /// Fit the asymptotic decay of the distance to the constant state.
    Decay(Common),
    /// Run with per-junction entropy monitoring columns.
    Entropy(Common),
    /// Evolve with the relaxation solver and evaluate both junction solvers
    /// on identical inputs each step.
    CompareJunction(Common),
}

fn load(common: &Common) -> Result<LoadedConfig, gasnet::Error> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        gasnet::Error::Config(format!("cannot read {}: {e}", common.config.display()))
    })?;
    let mut overrides = Vec::with_capacity(common.overrides.len());
    for item in &common.overrides {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            gasnet::Error::Config(format!("override {item:?} is not KEY=VALUE"))
        })?;
        overrides.push((k.to_string(), v.to_string()));
    }
    parse_with_overrides(&text, &overrides)?.build()
}

fn dispatch(cmd: &Command) -> Result<(), gasnet::Error> {
    let common = match cmd {
        Command::Run(c)
        | Command::Converge(c)
        | Command::Decay(c)
        | Command::Entropy(c)
        | Command::CompareJunction(c) => c,
    };
    let cfg = load(common)?;
    let out_dir = output::resolve_out_dir(&cfg, common.out.as_deref());
    let say = |msg: String| {
        if !common.quiet {
            println!("{msg}");
        }
    };
    match cmd {
        Command::Run(_) => {
            let result = output::run_to_dir(&cfg, &out_dir)?;
            say(format!(
                "run finished at t = {} after {} steps; artifacts in {}",
                result.final_state.time,
                result.monitors.records.len() - 1,
                out_dir.display()
            ));
        }
        Command::Converge(_) => {
            let rows = output::converge_to_dir(&cfg, &out_dir)?;
            say(format!(
                "convergence study with {} levels written to {}",
                rows.len(),
                out_dir.join("convergence.csv").display()
            ));
        }
        Command::Decay(_) => {
            let rows = output::decay_to_dir(&cfg, &out_dir)?;
            say(format!(
                "{} decay fits written to {}",
                rows.len(),
                out_dir.join("decay.csv").display()
            ));
        }
        Command::Entropy(_) => {
            output::entropy_to_dir(&cfg, &out_dir)?;
            say(format!(
                "entropy monitor written to {}",
                out_dir.join("entropy.csv").display()
            ));
        }
        Command::CompareJunction(_) => {
            let (_, cmp) = output::compare_to_dir(&cfg, &out_dir)?;
            match cmp.max_discrepancy {
                Some(d) => say(format!(
                    "junction solvers compared on {} steps; max discrepancy {d}{}",
                    cmp.rows.len(),
                    if cmp.unsupported_rows > 0 {
                        format!(" ({} unsupported steps)", cmp.unsupported_rows)
                    } else {
                        String::new()
                    }
                )),
                None => say(format!(
                    "Riemann solver unsupported on all {} steps",
                    cmp.rows.len()
                )),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_NUMERICAL)
            }
        }
    }
}
