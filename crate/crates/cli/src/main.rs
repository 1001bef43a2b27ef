use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use serde_json::json;

use sordering::fock::hs_distance;
use sordering::ordering::exp_number;
use sordering::quasiprob::{
    mehta_p, reconstruct_from_elements, reconstruct_from_symbol, s_symbol_field_escalated, GridSummary,
};
use sordering::statespec::build_density;
use sordering::verify::{run_suite, Mode};
use sordering::{Error, OrderingParameter, PhaseGrid, PhasePoint, StateExpr, DEFAULT_DIM};

#[derive(Parser)]
#[command(name = "sordering", version, about = "s-ordered phase-space tools on a truncated Fock space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GridArgs {
    /// Half side length of the square phase-space grid.
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the s-symbol of a state on a grid and write it as CSV.
    Grid {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild a state from its symbol or its coherent elements; writes a JSON summary.
    Reconstruct {
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, value_enum, default_value_t = Route::Symbol)]
        route: Route,
        #[command(flatten)]
        grid: GridArgs,
        /// Truncation of the input state for the elements route [default: 3 × dim].
        #[arg(long)]
        input_dim: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Glauber-Sudarshan P at one point from coherent elements.
    Mehta {
        #[arg(long)]
        state: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Print an s-ordered expansion and its normal, Weyl and antinormal forms.
    Expand {
        #[arg(long, value_enum)]
        op: ExpandOp,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
    },
    /// Run the identity checks and print the report as JSON.
    Verify {
        /// Fewer sample points per check.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Symbol,
    Elements,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExpandOp {
    #[value(name = "exp_number")]
    ExpNumber,
}

/// A failure with its exit code.
enum Failure {
    Usage(String, String),
    Numeric(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e)
        } else {
            Failure::Usage(e.kind().to_string(), e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = std::result::Result<ExitCode, Failure>;

fn diagnostic(kind: &str, code: u8, message: &str) -> ExitCode {
    let first = message.lines().next().unwrap_or("").trim();
    eprintln!("error kind={kind} exit={code} message={}", json!(first));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg = text.trim_start_matches("error: ");
            return diagnostic("usage", 2, msg);
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(kind, msg)) => diagnostic(&kind, 2, &msg),
        Err(Failure::Io(msg)) => diagnostic("io", 2, &msg),
        Err(Failure::Numeric(e)) => diagnostic(e.kind(), 3, &e.to_string()),
    }
}

fn state(spec: &str) -> std::result::Result<StateExpr, Failure> {
    sordering::parse(spec).map_err(|e| Failure::Usage("parse".to_string(), e.to_string()))
}

/// A complex number in the state grammar's `re[±imi]` form.
fn cnum(text: &str) -> std::result::Result<C64, Failure> {
    match sordering::parse(&format!("coherent({text})")) {
        Ok(StateExpr::Coherent(z)) => Ok(z),
        _ => Err(Failure::Usage("parse".to_string(), format!("not a complex number: {text}"))),
    }
}

fn grid_of(args: &GridArgs) -> std::result::Result<PhaseGrid, Failure> {
    Ok(PhaseGrid::centered(args.radius, args.step)?)
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Outcome {
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Grid { state: spec, s, grid, out } => {
            let expr = state(&spec)?;
            let g = grid_of(&grid)?;
            let field = s_symbol_field_escalated(|d| build_density(&expr, d), s, &g, grid.dim)?;
            write_file(&out, |w| field.write_csv(w))
        }
        Command::Reconstruct { state: spec, s, route, grid, input_dim, out } => {
            let expr = state(&spec)?;
            let g = grid_of(&grid)?;
            let dim = grid.dim;
            let target = build_density(&expr, dim)?;
            let rec = match route {
                Route::Symbol => {
                    let field = s_symbol_field_escalated(|d| build_density(&expr, d), s, &g, dim)?;
                    reconstruct_from_symbol(&field, dim)?
                }
                Route::Elements => {
                    let rho_in = build_density(&expr, input_dim.unwrap_or(3 * dim))?;
                    reconstruct_from_elements(&rho_in, s, &g, dim)?
                }
            };
            let report = json!({
                "hs_error": hs_distance(&rec.rho, target.op())?,
                "trace": rec.trace.re,
                "tail_mass": target.tail_mass(),
                "dim": dim,
                "grid": GridSummary::from(&g),
            });
            write_file(&out, |w| {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                w.write_all(b"\n")
            })
        }
        Command::Mehta { state: spec, z, grid } => {
            let expr = state(&spec)?;
            let z = cnum(&z)?;
            let g = grid_of(&grid)?;
            let rho = build_density(&expr, grid.dim)?;
            let p = mehta_p(&rho, PhasePoint::new(z.re, z.im), &g)?;
            println!("{}", json!({ "z": [z.re, z.im], "p": [p.re, p.im] }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Expand { op: ExpandOp::ExpNumber, lambda, s } => {
            let order = OrderingParameter::new(s)?;
            let g = exp_number(lambda, order.value())?;
            println!("exp_number(lambda={lambda:?}) at s={s:?}: {g}");
            for (name, target) in [
                ("normal", OrderingParameter::NORMAL),
                ("weyl", OrderingParameter::WEYL),
                ("antinormal", OrderingParameter::ANTINORMAL),
            ] {
                match g.reorder(target) {
                    Ok(r) => println!("{name} (s={:?}): {r}", target.value()),
                    Err(e) if e.is_numeric() => println!("{name} (s={:?}): {}", target.value(), e.kind()),
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { quick } => {
            let report = run_suite(if quick { Mode::Quick } else { Mode::Full });
            let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
            println!("{text}");
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                let failed: Vec<&str> =
                    report.checks.iter().filter(|c| !c.passed).map(|c| c.check_id.as_str()).collect();
                Ok(diagnostic("verification", 1, &format!("failed checks: {}", failed.join(","))))
            }
        }
    }
}
