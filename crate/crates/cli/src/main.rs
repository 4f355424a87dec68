use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riemap_cli::{catalog, describe, parse_scenario, run_scenario, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "riemap", version, about = "Verify geometric statements about Riemannian maps on sampled points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario file or a catalog entry.
    Verify {
        /// Path to a `.scn` file, or the name of a catalog scenario.
        scenario: String,
        /// Tolerance used for every check, overriding the scenario.
        #[arg(long, value_parser = positive)]
        tolerance: Option<f64>,
        /// Number of samples for grid and uniform sampling.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: Option<u64>,
        /// Seed for uniform sampling.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Worker threads for per-sample work.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
        /// Relative singular-value cutoff for the rank.
        #[arg(long = "rank-tol", value_parser = positive)]
        rank_tol: Option<f64>,
    },
    /// List the shipped scenarios.
    Catalog,
    /// Show what a catalog scenario contains.
    Describe { name: String },
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, found `{s}`")),
    }
}

fn load(arg: &str) -> Result<Scenario, String> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"))?;
        return parse_scenario(&text).map_err(|e| format!("{arg}: {e}"));
    }
    match catalog::load(arg) {
        Some(parsed) => parsed.map_err(|e| format!("{arg}: {e}")),
        None => Err(format!("`{arg}` is neither a file nor a catalog scenario")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog => {
            for e in catalog::CATALOG {
                let description = parse_scenario(e.text).map(|s| s.description).unwrap_or_default();
                println!("{:<22} {description}", e.name);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { name } => match catalog::load(&name) {
            Some(Ok(s)) => {
                print!("{}", describe(&s));
                ExitCode::SUCCESS
            }
            Some(Err(e)) => {
                eprintln!("error: {name}: {e}");
                ExitCode::from(2)
            }
            None => {
                eprintln!("error: no catalog scenario named `{name}`");
                ExitCode::from(2)
            }
        },
        Command::Verify {
            scenario,
            tolerance,
            samples,
            seed,
            json,
            threads,
            rank_tol,
        } => {
            let s = match load(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                tolerance,
                samples: samples.map(|n| n as usize),
                seed,
                rank_tolerance: rank_tol,
            };
            let report = match threads {
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
                    Ok(pool) => pool.install(|| run_scenario(&s, &opts)),
                    Err(e) => {
                        eprintln!("error: cannot start thread pool: {e}");
                        return ExitCode::from(2);
                    }
                },
                None => run_scenario(&s, &opts),
            };
            match json.as_deref() {
                Some(p) if p == Path::new("-") => println!("{}", report.to_json()),
                Some(p) => {
                    print!("{}", report.render());
                    if let Err(e) = std::fs::write(p, report.to_json() + "\n") {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", report.render()),
            }
            if report.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
