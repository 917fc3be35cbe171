//! Command-line driver: simulations, invariant suites, kernel probes and snapshot norms.
//!
//! Exit codes: 0 success, 1 failed check or I/O error, 2 configuration error,
//! 3 runtime abort (the last accepted state is still written).

mod config;
mod probe;
mod simulate;
mod snapshot;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nonlocalflow::verify::{run_all, run_suite, Suite, SuiteReport, VerifyConfig};

use crate::config::RunConfig;
use crate::probe::ProbeConfig;

pub const OUT_ENV: &str = "NONLOCALFLOW_OUT";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    Failed(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "run aborted: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "nonlocalflow",
    version,
    about = "Nonlocal interface-flow laboratory"
)]
struct Cli {
    /// Worker threads for parallel loops (advisory; results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for seeded initial data and random test families.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; falls back to the config, then to NONLOCALFLOW_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Muskat or Peskin simulation from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an invariant suite, or `all`.
    Verify {
        /// Suite name or `all`.
        suite: String,
        /// Optional JSON with `seed`, `n` and `kernels` overrides.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check the bounds of one symbol's fundamental solution.
    KernelProbe {
        #[arg(long)]
        config: PathBuf,
    },
    /// Norms of a state snapshot CSV, printed as JSON.
    Norms {
        snapshot: PathBuf,
        /// Hölder orders to report.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
        orders: Vec<f64>,
    },
}

fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn cmd_simulate(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let (mut cfg, bytes) = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.apply_seed(seed);
    }
    let dir = simulate::resolve_out(cli.out.clone(), &cfg, env_out())?;
    let outcome = simulate::simulate(&cfg, &bytes, &dir)?;
    match outcome.aborted {
        Some(reason) => Err(CliError::Runtime(format!(
            "{reason}; last accepted state written to {}",
            outcome.dir.display()
        ))),
        None => {
            println!("wrote {}", outcome.dir.display());
            Ok(())
        }
    }
}

fn print_table(reports: &[SuiteReport]) {
    println!(
        "{:<22} {:>6} {:>6} {:>13} {:>9}  status",
        "suite", "checks", "failed", "worst margin", "seconds"
    );
    for r in reports {
        println!(
            "{:<22} {:>6} {:>6} {:>13.4e} {:>9.2}  {}",
            r.suite,
            r.checks.len(),
            r.failures().count(),
            r.worst_margin(),
            r.seconds,
            if r.pass() { "PASS" } else { "FAIL" }
        );
    }
    for r in reports {
        for c in r.failures() {
            println!("[{}] {c}", r.suite);
        }
    }
}

fn cmd_verify(cli: &Cli, suite: &str, config: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = match config {
        Some(p) => serde_json::from_str::<VerifyConfig>(&read_text(p)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => VerifyConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let reports = if suite == "all" {
        run_all(&cfg)
    } else {
        let s: Suite = suite.parse().map_err(|_| {
            CliError::Config(format!(
                "unknown suite {suite:?}; expected one of {} or all",
                suite_names()
            ))
        })?;
        vec![run_suite(s, &cfg)]
    };
    print_table(&reports);
    if let Some(dir) = cli.out.clone().or_else(env_out) {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let text =
            serde_json::to_string_pretty(&reports).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        std::fs::write(dir.join("verify.json"), text).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let failed = reports.iter().filter(|r| !r.pass()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{failed} suite(s) failed")))
    }
}

fn suite_names() -> String {
    Suite::ALL.map(|s| s.name()).join(", ")
}

fn cmd_kernel_probe(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let cfg = ProbeConfig::parse(&read_text(path)?)?;
    let outcome = probe::probe(&cfg)?;
    println!("{}", nonlocalflow::kernels::BoundReport::csv_header());
    for r in &outcome.reports {
        println!("{}", r.csv_row());
    }
    if let Some(d) = &outcome.decay {
        println!(
            "decay fit: slope {:.4} threshold {:.4} over {} points: {}",
            d.slope,
            d.threshold,
            d.points,
            if d.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(dir) = cli.out.clone().or_else(env_out) {
        probe::write_outputs(&dir, &outcome)?;
    }
    if outcome.pass() {
        Ok(())
    } else {
        Err(CliError::Failed("kernel bound check failed".into()))
    }
}

fn cmd_norms(snapshot: &Path, orders: &[f64]) -> Result<(), CliError> {
    let f = snapshot::read_state(snapshot)?;
    let report = snapshot::norms_report(&f, orders)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?
    );
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        // a pool that is already initialized keeps its size; the flag is advisory
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match &cli.command {
        Command::Simulate { config } => cmd_simulate(cli, config),
        Command::Verify { suite, config } => cmd_verify(cli, suite, config.as_deref()),
        Command::KernelProbe { config } => cmd_kernel_probe(cli, config),
        Command::Norms { snapshot, orders } => cmd_norms(snapshot, orders),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
