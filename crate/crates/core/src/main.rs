use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use faraday::dsl::{self, Grid, RunError, RunReport};

/// Simulate Faraday-interface entanglement protocols.
///
/// Exit codes: 0 success, 1 an assertion failed, 2 the input could not be
/// read, parsed or accepted, 3 numerical failure.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol script and evaluate its assertions.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override a declared parameter, e.g. `--set k=0.5`.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// Run a script (or `builtin:<family>`) over a parameter grid.
    Sweep {
        file: String,
        /// Axes such as `k1=0.04:2:50;k2=0.02:1:50`.
        #[arg(long)]
        grid: Grid,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Parse a script and report diagnostics.
    Check { file: PathBuf },
    /// Print a bundled script, or run it with `--run`.
    Demo {
        #[arg(value_parser = ["epr", "eraser", "ghz", "cluster"])]
        name: String,
        #[arg(long)]
        run: bool,
        #[arg(long, default_value_t = 0, requires = "run")]
        seed: u64,
        #[arg(long, requires = "run")]
        json: Option<PathBuf>,
    },
}

const ASSERT_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const NUMERICAL: u8 = 3;

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(INPUT_ERROR)
    })
}

fn fail(e: RunError) -> ExitCode {
    match e {
        RunError::Numerical(e) if e.is_input_error() => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
        RunError::Parse(_) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
        RunError::Numerical(_) => {
            eprintln!("error: {e}");
            ExitCode::from(NUMERICAL)
        }
    }
}

fn summarize(r: &RunReport) {
    if let Some(name) = &r.protocol {
        println!("protocol {name} (seed {})", r.seed);
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    for s in &r.steps {
        match (s.outcome, s.predicted_variance) {
            (Some(o), _) => println!("step {:>2} {:<7} outcome {o:.6}", s.index, s.kind),
            (_, Some(v)) => println!("step {:>2} {:<7} predicted variance {v:.6}", s.index, s.kind),
            _ => println!("step {:>2} {}", s.index, s.kind),
        }
    }
    for o in &r.outputs {
        println!("{:<16} {:.12}", o.name, o.value);
    }
    for c in &r.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        match (&c.error, c.value) {
            (Some(e), _) => println!("{status} {} ({e})", c.statement),
            (None, Some(v)) => println!("{status} {} (value {v:.9})", c.statement),
            (None, None) => println!("{status} {}", c.statement),
        }
    }
}

fn finish(r: &RunReport, json: Option<&Path>) -> ExitCode {
    summarize(r);
    if let Some(path) = json {
        if let Err(e) = std::fs::write(path, r.to_json() + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(INPUT_ERROR);
        }
    }
    if r.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(ASSERT_FAILED)
    }
}

fn parse_sets(sets: &[String]) -> Result<Vec<(String, f64)>, ExitCode> {
    sets.iter()
        .map(|s| {
            s.split_once('=')
                .and_then(|(k, v)| Some((k.to_string(), v.parse::<f64>().ok().filter(|v| v.is_finite())?)))
                .ok_or_else(|| {
                    eprintln!("error: invalid --set `{s}`, expected NAME=VALUE");
                    ExitCode::from(INPUT_ERROR)
                })
        })
        .collect()
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { file, seed, json, set } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let overrides = match parse_sets(&set) {
                Ok(o) => o,
                Err(code) => return code,
            };
            match dsl::run_script(&src, seed, &overrides) {
                Ok(r) => finish(&r, json.as_deref()),
                Err(e) => fail(e),
            }
        }
        Command::Sweep { file, grid, out, seed, jobs } => {
            let table = if let Some(name) = file.strip_prefix("builtin:") {
                dsl::sweep_family(name, &grid, seed, jobs)
            } else {
                let src = match read(Path::new(&file)) {
                    Ok(s) => s,
                    Err(code) => return code,
                };
                match dsl::parse(&src) {
                    Ok(p) => dsl::sweep(&p, &grid, seed, jobs),
                    Err(d) => return fail(d.into()),
                }
            };
            let table = match table {
                Ok(t) => t,
                Err(e) => return fail(e.into()),
            };
            if let Err(e) = std::fs::write(&out, table.to_csv()) {
                eprintln!("error: cannot write {}: {e}", out.display());
                return ExitCode::from(INPUT_ERROR);
            }
            println!("{} rows written to {}", table.rows.len(), out.display());
            ExitCode::SUCCESS
        }
        Command::Check { file } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match dsl::parse(&src) {
                Ok(p) => {
                    println!(
                        "ok: {} samples, {} steps, {} assertions, {} reports",
                        p.n_samples(),
                        p.steps.len(),
                        p.checks.len(),
                        p.reports.len()
                    );
                    for w in p.warnings() {
                        println!("warning: {w}");
                    }
                    ExitCode::SUCCESS
                }
                Err(d) => {
                    eprintln!("{}: {d}", file.display());
                    ExitCode::from(INPUT_ERROR)
                }
            }
        }
        Command::Demo { name, run, seed, json } => {
            let src = dsl::demo_script(&name).expect("validated by clap");
            if !run {
                print!("{src}");
                return ExitCode::SUCCESS;
            }
            match dsl::run_script(src, seed, &[]) {
                Ok(r) => finish(&r, json.as_deref()),
                Err(e) => fail(e),
            }
        }
    }
}
