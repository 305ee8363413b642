use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use fracsum::numerics::Precision;
use fracsum_cli::render::{render, Format};
use fracsum_cli::reproduce::{overall, render_text, reproduce_all, select};
use fracsum_cli::{
    classify_coefficients, classify_problem, describe, run, ProblemSource, RunConfig, DEFAULT_DEPTH,
};

#[derive(Parser)]
#[command(name = "fracsum", version, about = "Sum slowly convergent and divergent series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accelerate one problem and print the diagonal of the table.
    Run {
        /// Builtin problem id (see `fracsum list`).
        problem: Option<String>,
        /// JSON problem definition instead of a builtin.
        #[arg(long, conflicts_with = "problem")]
        problem_file: Option<PathBuf>,
        /// `aps:KAPPA,ETA` or `gps:TAU`.
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value = "quad")]
        precision: String,
        #[arg(long, default_value = "text")]
        format: Format,
        /// Print every k-th row (the last row is always printed).
        #[arg(long, default_value_t = 4)]
        stride: usize,
    },
    /// Structural parameters and convergence verdict of a term sequence.
    Classify {
        /// Exponent mu = s/m of the ratio expansion, e.g. `0`, `1/2`, `-1`.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
        #[arg(long)]
        m: Option<u32>,
        /// Ratio coefficients c_0 .. c_m, e.g. `1 -2 0.5+1i`.
        #[arg(allow_hyphen_values = true)]
        coefficients: Vec<String>,
        /// Fit the coefficients from a builtin problem's terms.
        #[arg(long, conflicts_with_all = ["mu", "coefficients"])]
        problem: Option<String>,
        #[arg(long, conflicts_with_all = ["mu", "coefficients", "problem"])]
        problem_file: Option<PathBuf>,
    },
    /// Recompute the reference tables and compare them row by row.
    Reproduce {
        /// Problem id, or `"<problem> <schedule>"` for a single table.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value = "quad")]
        precision: String,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List builtin problems.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Writes to stdout; a closed pipe (`fracsum list | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            problem,
            problem_file,
            schedule,
            depth,
            precision,
            format,
            stride,
        } => {
            let problem = match (problem, problem_file) {
                (Some(id), None) => ProblemSource::Builtin(id),
                (None, Some(path)) => ProblemSource::File(path),
                _ => bail!("give a problem id or --problem-file"),
            };
            let cfg = RunConfig {
                problem,
                schedule,
                depth,
                precision: Precision::preset(&precision)?,
                stride,
            };
            emit(&render(&run(&cfg)?, format))?;
            Ok(0)
        }
        Command::Classify {
            mu,
            m,
            coefficients,
            problem,
            problem_file,
        } => {
            let c = match (problem, problem_file) {
                (Some(id), _) => classify_problem(&ProblemSource::Builtin(id))?,
                (_, Some(path)) => classify_problem(&ProblemSource::File(path))?,
                (None, None) => {
                    let (Some(mu), Some(m)) = (mu, m) else {
                        bail!("give --mu, --m and the coefficients c_0..c_m, or --problem");
                    };
                    classify_coefficients(&mu, m, &coefficients, Precision::QUAD)?
                }
            };
            emit(&describe(&c))?;
            Ok(0)
        }
        Command::Reproduce {
            only,
            precision,
            json,
        } => {
            let fixtures = select(only.as_deref());
            if fixtures.is_empty() {
                bail!("no reference table matches '{}'", only.unwrap_or_default());
            }
            let reports = reproduce_all(&fixtures, Precision::preset(&precision)?);
            if json {
                emit(&(serde_json::to_string_pretty(&reports)? + "\n"))?;
            } else {
                emit(&render_text(&reports))?;
            }
            Ok(overall(&reports).exit_code())
        }
        Command::List => {
            let mut out = String::new();
            for id in fracsum::builtin_ids() {
                let p = fracsum::builtin(id)?;
                out.push_str(&format!("{id:<8} {}\n", p.description));
            }
            emit(&out)?;
            Ok(0)
        }
    }
}
