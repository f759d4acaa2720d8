//! `chernlab`: command-line front end.
//!
//! Exit codes: 0 ok, 1 internal error, 2 unreadable input or unknown key,
//! 3 violated relation / `d² ≠ 0` / bad filtration, 4 disagreement between
//! independent computations, 5 inadmissible degree, 6 geodesic escape.

mod config;
mod euler;
mod geometry;
mod milnor;
mod report;
mod spectral;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chernlab::milnor::RELATION_TOL;
use chernlab::spectral::DoubleFiltration;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use config::Settings;
use report::{render_checks, sha256_hex, Exit, Failure, Inputs, Outcome, RunReport};

#[derive(Parser, Debug)]
#[command(name = "chernlab", version, about = "Flat bundles, spectral sequences, connections and Euler characteristics")]
struct Cli {
    /// Print only the JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Settings file (default: $CHERNLAB_CONFIG, then ./chernlab.toml).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Milnor number of a representation file.
    Milnor {
        file: PathBuf,
        /// Cross-check against the winding number of the sampled loop.
        #[arg(long)]
        oracle: bool,
        /// Tolerance on the surface relation.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Build a representation of genus G with Milnor number D.
    Build {
        genus: usize,
        #[arg(allow_negative_numbers = true)]
        degree: i64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Pages of the spectral sequence of a filtered or double complex file.
    Spectral {
        file: PathBuf,
        /// Last page to tabulate (default: the page by which it stabilizes).
        #[arg(long, value_name = "R_MAX", allow_negative_numbers = true)]
        pages: Option<i64>,
        /// Read a double complex and filter its total complex.
        #[arg(long, value_enum)]
        double: Option<DoubleArg>,
    },
    /// Geodesics, parallel transport, Gauss-Bonnet and Christoffel symbols
    /// on the built-in geometries euclidean:m, hopf:m, flat-torus:m, sphere:r.
    Geometry {
        #[command(subcommand)]
        op: GeometryCommand,
    },
    /// Euler characteristic of an expression such as "(Sigma(3)*Sigma(3)) # P^6",
    /// or "smillie N" for Smillie's manifold of dimension N.
    Euler {
        #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
        words: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum GeometryCommand {
    Geodesic {
        key: String,
        /// Start point, comma separated; `pi` multiples are accepted.
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        /// Initial velocity, or `-p` to aim at the origin.
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        steps: Option<usize>,
        /// Largest number of trajectory rows to print.
        #[arg(long, default_value_t = geometry::DEFAULT_ROWS)]
        rows: usize,
    },
    /// Transport a vector along the coordinate segment from P to TO.
    Transport {
        key: String,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    GaussBonnet {
        key: String,
        #[arg(long)]
        mesh: Option<usize>,
    },
    LeviCivita {
        key: String,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DoubleArg {
    Vertical,
    Horizontal,
}

impl From<DoubleArg> for DoubleFiltration {
    fn from(d: DoubleArg) -> Self {
        match d {
            DoubleArg::Vertical => DoubleFiltration::Vertical,
            DoubleArg::Horizontal => DoubleFiltration::Horizontal,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::new(Exit::Input, format!("cannot read {}: {e}", path.display())))
}

/// Runs the command and returns the input bytes that were hashed with it.
fn dispatch(command: &Command, settings: &Settings) -> Result<(Vec<u8>, Outcome), Failure> {
    let tol = settings.tolerance.value;
    match command {
        Command::Milnor { file, oracle, .. } => {
            let bytes = read(file)?;
            let out = milnor::cmd_milnor(&bytes, tol, *oracle)?;
            Ok((bytes, out))
        }
        Command::Build { genus, degree, out, .. } => Ok((vec![], milnor::cmd_build(*genus, *degree, out.as_deref(), tol)?)),
        Command::Spectral { file, pages, double } => {
            let bytes = read(file)?;
            let out = spectral::cmd_spectral(&bytes, *pages, double.map(Into::into))?;
            Ok((bytes, out))
        }
        Command::Geometry { op } => {
            let out = match op {
                GeometryCommand::Geodesic { key, p, v, t, steps, rows } => geometry::cmd_geodesic(&geometry::GeodesicArgs {
                    key,
                    p: p.as_deref(),
                    v: v.as_deref(),
                    t: *t,
                    steps: *steps,
                    rows: *rows,
                })?,
                GeometryCommand::Transport { key, p, to, w, steps } => geometry::cmd_transport(&geometry::TransportArgs {
                    key,
                    p: p.as_deref(),
                    to,
                    w: w.as_deref(),
                    steps: *steps,
                })?,
                GeometryCommand::GaussBonnet { key, .. } => geometry::cmd_gauss_bonnet(key, settings.mesh.value)?,
                GeometryCommand::LeviCivita { key, p } => geometry::cmd_levi_civita(key, p.as_deref())?,
            };
            Ok((vec![], out))
        }
        Command::Euler { words } => Ok((vec![], euler::cmd_euler(words)?)),
    }
}

fn flags(command: &Command) -> (Option<f64>, Option<usize>) {
    match command {
        Command::Milnor { tolerance, .. } | Command::Build { tolerance, .. } => (*tolerance, None),
        Command::Geometry { op: GeometryCommand::GaussBonnet { mesh, .. } } => (None, *mesh),
        _ => (None, None),
    }
}

fn run(cli: &Cli, argv: Vec<String>) -> Exit {
    let start = Instant::now();
    let (tolerance, mesh) = flags(&cli.command);
    let attempt = config::resolve(cli.config.as_deref(), tolerance, mesh, RELATION_TOL)
        .and_then(|settings| dispatch(&cli.command, &settings).map(|r| (settings, r)));
    let (settings, bytes, outcome) = match attempt {
        Ok((settings, (bytes, outcome))) => (settings, bytes, outcome),
        Err(failure) => {
            if cli.json {
                let v = json!({"command": argv, "exit": failure.exit, "error": failure.message});
                println!("{}", serde_json::to_string_pretty(&v).expect("plain values"));
            }
            eprintln!("error: {failure}");
            return failure.exit;
        }
    };
    let settings_json = serde_json::to_value(&settings).expect("plain values");
    let digest = sha256_hex(&[argv.join("\u{1f}").as_bytes(), &bytes, settings_json.to_string().as_bytes()]);
    let report = RunReport::new(argv, Inputs { sha256: digest, settings: settings_json }, &outcome, start.elapsed());
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("plain values"));
    } else {
        print!("{}", outcome.text);
        print!("{}", render_checks(&outcome.checks));
    }
    match outcome.failure {
        Some(f) => {
            eprintln!("error: {f}");
            f.exit
        }
        None => Exit::Ok,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let argv: Vec<String> = std::iter::once("chernlab".to_string()).chain(std::env::args().skip(1)).collect();
    match std::panic::catch_unwind(|| run(&cli, argv)) {
        Ok(exit) => ExitCode::from(exit.code() as u8),
        Err(_) => ExitCode::from(Exit::Internal.code() as u8),
    }
}
