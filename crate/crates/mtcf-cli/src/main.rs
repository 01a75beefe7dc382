//! `mtcf`: run correlation-function scenarios, compare traces, emit presets.
//!
//! Exit codes: 0 success (compare: within tolerance), 1 compare outside
//! tolerance, 2 configuration or input errors, 3 numerical overflow abort.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mtcf::error::Error;
use mtcf::scenario::{self, ScenarioConfig, LEAKAGE_WARN_THRESHOLD};
use mtcf::trace::{self, CorrelationTrace};

#[derive(Parser)]
#[command(name = "mtcf", version, about = "Non-Markovian multiple-time correlation functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario configuration and write its CSV trace.
    Run {
        /// Path to a scenario JSON file.
        config: PathBuf,
        /// Worker threads for the Monte-Carlo engine (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output CSV path, overriding the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two traces on the same grid.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest tolerated |difference|.
        #[arg(long)]
        tol: f64,
        /// Optional CSV report of per-point differences.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in scenario preset (fig1a, fig1b, fig2, fig3).
    Preset {
        name: String,
        /// Output path (default: <name>.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::TooManyOverflows { .. } | Error::NonFinite => 3,
        _ => 2,
    }
}

fn fail(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(&err))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            threads,
            out,
        } => run(&config, threads, out.as_deref()),
        Command::Compare { a, b, tol, out } => compare(&a, &b, tol, out.as_deref()),
        Command::Preset { name, out } => preset(&name, out.as_deref()),
    }
}

fn seed_from_env() -> Result<Option<u64>, Error> {
    match std::env::var("MTCF_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::config("MTCF_SEED", format!("`{text}` is not a valid seed"))),
        Err(_) => Ok(None),
    }
}

fn run(config_path: &Path, threads: Option<usize>, out: Option<&Path>) -> ExitCode {
    let cfg = match ScenarioConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let seed = match seed_from_env() {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let out_path: PathBuf = match out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
    {
        Some(p) => p,
        None => {
            return fail(Error::config(
                "output",
                "no output path: set `output` in the config or pass --out",
            ))
        }
    };
    let (trace, diagnostics) = match scenario::run_scenario(&cfg, threads, seed) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Some(leak) = diagnostics.truncation_leakage {
        if leak > LEAKAGE_WARN_THRESHOLD {
            eprintln!(
                "warning: truncation leakage {leak:.3e} exceeds {LEAKAGE_WARN_THRESHOLD:.0e}; \
                 raise n_max"
            );
        }
    }
    if let Some(overflow) = diagnostics.mc_overflow {
        if overflow > 0 {
            eprintln!("warning: {overflow} trajectories overflowed and were discarded");
        }
    }
    if let Err(e) = trace.write_csv_atomic(&out_path) {
        return fail(e);
    }
    println!("wrote {} points to {}", trace.points.len(), out_path.display());
    ExitCode::SUCCESS
}

fn compare(a_path: &Path, b_path: &Path, tol: f64, out: Option<&Path>) -> ExitCode {
    let a = match CorrelationTrace::read_csv_path(a_path) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let b = match CorrelationTrace::read_csv_path(b_path) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let report = match trace::compare(&a, &b) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!("t,t_prime,abs_delta,delta_over_stderr");
    for row in &report.rows {
        match row.sigma_ratio {
            Some(r) => println!(
                "{:.6},{:.6},{:.6e},{:.3}",
                row.t, row.t_prime, row.delta_abs, r
            ),
            None => println!("{:.6},{:.6},{:.6e},n/a", row.t, row.t_prime, row.delta_abs),
        }
    }
    println!("points: {}", report.rows.len());
    println!("max |delta|: {:.6e}", report.max_abs_delta);
    match report.max_sigma_ratio {
        Some(r) => println!("max |delta|/stderr: {r:.3}"),
        None => println!("max |delta|/stderr: n/a (no standard errors reported)"),
    }
    if let Some(path) = out {
        let write_report = || -> Result<(), Error> {
            use std::io::Write;
            let mut f = std::fs::File::create(path)?;
            writeln!(f, "t,t_prime,abs_delta,delta_over_stderr")?;
            for row in &report.rows {
                match row.sigma_ratio {
                    Some(r) => writeln!(
                        f,
                        "{:.16e},{:.16e},{:.16e},{:.16e}",
                        row.t, row.t_prime, row.delta_abs, r
                    )?,
                    None => writeln!(
                        f,
                        "{:.16e},{:.16e},{:.16e},",
                        row.t, row.t_prime, row.delta_abs
                    )?,
                }
            }
            Ok(())
        };
        if let Err(e) = write_report() {
            return fail(e);
        }
    }
    if report.max_abs_delta <= tol {
        println!("within tolerance {tol:e}");
        ExitCode::SUCCESS
    } else {
        println!("tolerance {tol:e} exceeded");
        ExitCode::from(1)
    }
}

fn preset(name: &str, out: Option<&Path>) -> ExitCode {
    let cfg = match scenario::preset(name) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("{name}.json")));
    let text = cfg.to_json_pretty();
    if let Err(e) = std::fs::write(&path, text.as_bytes()) {
        return fail(Error::Io(e));
    }
    println!("wrote preset `{name}` to {}", path.display());
    ExitCode::SUCCESS
}
