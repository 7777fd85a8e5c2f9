use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use morse_boundary::catalog;
use morse_boundary::error::MorseError;
use morse_boundary::pipeline::analyze;
use morse_boundary::report::{failed_checks, to_json, to_text, ReportOptions};
use morse_boundary::svg;
use morse_boundary::tolerances::Tolerances;
use morse_boundary::verify;

const USAGE: u8 = 1;
const MATH: u8 = 2;

#[derive(Parser)]
#[command(name = "morse-bnd", version, about = "Morse complexes of manifolds with boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in manifolds.
    List,
    /// Build the complexes of one manifold and compare with its reference homology.
    Analyze {
        name: String,
        #[arg(long, value_enum, default_value = "both")]
        complex: Which,
        #[arg(long, value_enum, default_value = "both")]
        coefficients: Coefficients,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write a flow portrait (2-dimensional entries only).
        #[arg(long)]
        svg: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance override, `name=value`; may be repeated.
        #[arg(long = "tol", value_parser = parse_override)]
        tol: Vec<(String, f64)>,
    },
    /// Run every acceptance criterion over the catalog.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "tol", value_parser = parse_override)]
        tol: Vec<(String, f64)>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "N", alias = "n")]
    N,
    #[value(name = "D", alias = "d")]
    D,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coefficients {
    Untwisted,
    Orientation,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.parse().map_err(|e| format!("{e}"))?;
    Ok((k.to_string(), v))
}

fn tolerances(flags: &[(String, f64)]) -> Result<(Tolerances, BTreeMap<String, f64>), MorseError> {
    let mut overrides = match std::env::var("MORSE_TOL_OVERRIDES") {
        Ok(text) if !text.trim().is_empty() => Tolerances::parse_overrides(&text)?,
        _ => BTreeMap::new(),
    };
    overrides.extend(flags.iter().cloned());
    Ok((Tolerances::default().with_overrides(&overrides)?, overrides))
}

fn exit_for(e: &MorseError) -> u8 {
    match e {
        MorseError::UnknownEntry(_) | MorseError::InvalidOverride(_) => USAGE,
        _ => MATH,
    }
}

fn fail(e: MorseError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_for(&e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::List => {
            for name in catalog::list() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Analyze { name, complex, coefficients, format, svg: svg_path, seed, tol } => {
            let (tol, overrides) = match tolerances(&tol) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let entry = match catalog::get(&name) {
                Ok(e) => e,
                Err(e) => return fail(e),
            };
            if svg_path.is_some() && entry.dim() != 2 {
                eprintln!("error: --svg needs a 2-dimensional entry, `{name}` has dimension {}", entry.dim());
                return ExitCode::from(USAGE);
            }
            let pkg = match analyze(&entry, seed, &tol) {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            let opts = ReportOptions {
                neumann: matches!(complex, Which::N | Which::Both),
                dirichlet: matches!(complex, Which::D | Which::Both),
                untwisted: matches!(coefficients, Coefficients::Untwisted | Coefficients::Both),
                orientation: matches!(coefficients, Coefficients::Orientation | Coefficients::Both),
            };
            match format {
                Format::Json => {
                    let mut json = to_json(&pkg, &entry, &opts);
                    json["meta"]["tolerance_overrides"] = serde_json::json!(overrides);
                    println!("{}", serde_json::to_string_pretty(&json).expect("report serializes"));
                }
                Format::Text => print!("{}", to_text(&pkg, &entry, &opts)),
            }
            if let Some(path) = svg_path {
                if let Err(e) = std::fs::write(&path, svg::render(&pkg, &entry.chart)) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(USAGE);
                }
            }
            let failed = failed_checks(&pkg, &opts);
            for l in &failed {
                eprintln!("failed check {}: {}", l.check, l.detail);
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(MATH)
            }
        }
        Command::Verify { seed, tol } => {
            let (tol, _) = match tolerances(&tol) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let results = verify::run(seed, &tol);
            for r in &results {
                println!("{:>2}  {:<28} {}  {}", r.number, r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(MATH)
            }
        }
    }
}
