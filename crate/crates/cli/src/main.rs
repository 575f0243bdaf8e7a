//! Batch command-line front end: build and evaluate systems, compute
//! orbit normal forms, run verification suites, and measure distances.

mod commands;
mod config;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{GridSpec, EXIT_SCHEMA};
use refless_core::Side;

#[derive(Parser)]
#[command(name = "refless", version, about = "Finite-gap reflectionless system toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a configuration, build the system, and print a summary.
    Build {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate an m function on a grid and write comma-separated rows.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Which half-line function to evaluate.
        #[arg(long, default_value = "plus", value_parser = ["plus", "minus"])]
        side: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the orbit normal form of the configured system.
    Orbit {
        #[arg(long)]
        config: PathBuf,
        /// Normal form to compute.
        #[arg(long, value_parser = ["dirac", "schroedinger", "jacobi", "jacobi-data"])]
        kind: String,
    },
    /// Run numerical checks: per-configuration or the full suite.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run the full acceptance battery instead of per-config checks.
        #[arg(long)]
        suite: bool,
        /// Restrict to one named per-config check.
        #[arg(long)]
        check: Option<String>,
        /// Evaluation point for the reflectionless check.
        #[arg(long)]
        t: Option<f64>,
        /// Threshold override, NAME=VALUE; repeatable.
        #[arg(long = "tol")]
        tol: Vec<String>,
    },
    /// Print the metric distance between two systems.
    Distance {
        /// Configuration path or "const:A" / "const:inf" literal.
        a: String,
        /// Configuration path or "const:A" / "const:inf" literal.
        b: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GridArgs {
    /// Rectangle grid: re_lo,re_hi,im_lo,im_hi,n (n samples per axis).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Boundary grid: t_lo,t_hi,eps,n.
    #[arg(long, allow_hyphen_values = true)]
    boundary: Option<String>,
}

fn parse_floats(spec: &str, n: usize, what: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != n {
        return Err(format!("{what}: expected {n} comma-separated values"));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("{what}: {p} is not a number"))
        })
        .collect()
}

fn parse_grid(args: &GridArgs) -> Result<GridSpec, String> {
    if let Some(spec) = &args.grid {
        let v = parse_floats(spec, 5, "--grid")?;
        if v[4] < 0.0 || v[4].fract() != 0.0 {
            return Err("--grid: n must be a non-negative integer".into());
        }
        return Ok(GridSpec::Rect {
            re_lo: v[0],
            re_hi: v[1],
            im_lo: v[2],
            im_hi: v[3],
            n: v[4] as usize,
        });
    }
    let spec = args.boundary.as_ref().expect("clap group");
    let v = parse_floats(spec, 4, "--boundary")?;
    if v[3] < 0.0 || v[3].fract() != 0.0 {
        return Err("--boundary: n must be a non-negative integer".into());
    }
    Ok(GridSpec::Boundary { t_lo: v[0], t_hi: v[1], eps: v[2], n: v[3] as usize })
}

fn parse_tols(specs: &[String]) -> Result<HashMap<String, f64>, String> {
    let mut map = HashMap::new();
    for s in specs {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| format!("--tol {s}: expected NAME=VALUE"))?;
        let v: f64 = value
            .parse()
            .map_err(|_| format!("--tol {s}: {value} is not a number"))?;
        map.insert(name.to_string(), v);
    }
    Ok(map)
}

fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Build { config } => commands::cmd_build(&config),
        Command::Eval { config, grid, side, out } => {
            let spec = match parse_grid(&grid) {
                Ok(g) => g,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return EXIT_SCHEMA;
                }
            };
            let side = if side == "plus" { Side::Plus } else { Side::Minus };
            commands::cmd_eval(&config, &spec, side, out.as_deref())
        }
        Command::Orbit { config, kind } => commands::cmd_orbit(&config, &kind),
        Command::Check { config, suite, check, t, tol } => {
            let tols = match parse_tols(&tol) {
                Ok(m) => m,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return EXIT_SCHEMA;
                }
            };
            commands::cmd_check(config.as_deref(), suite, check.as_deref(), t, &tols)
        }
        Command::Distance { a, b } => commands::cmd_distance(&a, &b),
    }
}

fn main() -> ExitCode {
    ExitCode::from(u8::try_from(run()).unwrap_or(1))
}
