use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use risuav::ao::Algorithm;
use risuav::channel::Scenario;
use risuav::experiment::{
    dump_scenario, emit_results, load_scenario, parse_values, run_single, run_sweep, Axis, ResultRow, SweepSpec,
};
use risuav::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "risuav", version, about = "Robust RIS-assisted secure UAV communication simulator")]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "RISUAV_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one algorithm on one seeded channel realization.
    Run {
        /// Scenario file; the desk preset when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "JO")]
        algorithm: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep one parameter over seeded realizations.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// One of T, deltaA2, w, Pbar (dBm).
        #[arg(long)]
        axis: String,
        /// Comma-separated, strictly increasing.
        #[arg(long)]
        values: String,
        #[arg(long, default_value_t = 10)]
        realizations: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Comma-separated algorithm names.
        #[arg(long, default_value = "JO,JO_NPB,JO_HT,JO_NR")]
        algorithms: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a scenario file and print the resolved values.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn scenario(config: Option<&Path>) -> Result<Scenario, Error> {
    match config {
        Some(path) => load_scenario(path),
        None => Ok(Scenario::desk()),
    }
}

fn report_rows(rows: &[ResultRow]) -> bool {
    let mut all_ok = true;
    for r in rows {
        let value = r.axis.map(|a| format!(" {a}={}", r.value)).unwrap_or_default();
        if r.is_ok() {
            println!(
                "{}{value} seed={} r_sec={:.6} iterations={} converged={}",
                r.algorithm, r.seed, r.r_sec, r.iterations, r.converged
            );
        } else {
            all_ok = false;
            eprintln!("{}{value} seed={}: {}", r.algorithm, r.seed, r.status);
        }
    }
    all_ok
}

fn execute(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidSweep("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run {
            config,
            algorithm,
            seed,
            out,
        } => {
            let scenario = scenario(config.as_deref())?;
            let algorithm: Algorithm = algorithm.parse()?;
            let row = run_single(&scenario, algorithm, seed);
            let rows = [row];
            emit_results(&rows, &out)?;
            Ok(report_rows(&rows))
        }
        Command::Sweep {
            config,
            axis,
            values,
            realizations,
            base_seed,
            algorithms,
            out,
        } => {
            let scenario = scenario(config.as_deref())?;
            let spec = SweepSpec {
                axis: axis.parse::<Axis>()?,
                values: parse_values(&values)?,
                realizations,
                base_seed,
                algorithms: algorithms
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<Algorithm>, Error>>()?,
            };
            let rows = run_sweep(&spec, &scenario)?;
            emit_results(&rows, &out)?;
            Ok(report_rows(&rows))
        }
        Command::Validate { config } => {
            let scenario = load_scenario(&config)?;
            print!("{}", dump_scenario(&scenario));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}
