//! `mpm`: validate matched pairs, derive them from matrix bases, simulate
//! matched Lie-Poisson and Euler-Poincaré flows, audit closed-form formulas
//! and factor `SL(2,C)` matrices.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_list, parse_numbers, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "mpm", version, about = "Matched pair Lie algebra mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Debug)]
struct Numbers(Vec<f64>);

fn numbers(s: &str) -> Result<Numbers, String> {
    parse_numbers(s).map(Numbers)
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Forms {
    /// Closed forms printed for the sl(2,C) example.
    Printed,
    /// Transposes of the pair's own tensors.
    Canonical,
}

#[derive(Subcommand)]
enum Command {
    /// Check antisymmetry, Jacobi and compatibility of a pair.
    Check {
        /// Built-in pair name or tensor document path.
        pair: String,
    },
    /// Integrate a matched Lie-Poisson or Euler-Poincaré flow.
    Simulate {
        /// JSON run configuration; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        pair: Option<String>,
        /// Built-in name or JSON file with "Q" and optional "b".
        #[arg(long)]
        hamiltonian: Option<String>,
        /// Initial point, comma separated (velocities in ep mode).
        #[arg(long, value_parser = numbers, allow_hyphen_values = true)]
        initial: Option<Numbers>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end", allow_hyphen_values = true)]
        t_end: Option<f64>,
        /// right or left
        #[arg(long)]
        convention: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Comma-separated invariant names.
        #[arg(long)]
        invariants: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix for <out>.csv and <out>.summary.json.
        #[arg(long)]
        out: Option<String>,
    },
    /// Compare closed-form formulas with the canonical ones of a reference pair.
    Audit {
        /// Reference pair (`sl2c` is the derived sl(2,C) pair).
        #[arg(default_value = "sl2c")]
        pair: String,
        #[arg(long, value_enum, default_value = "printed")]
        forms: Forms,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also write <out>.txt and <out>.json.
        #[arg(long)]
        out: Option<String>,
    },
    /// Derive a tensor document from a matrix-basis file.
    Derive {
        basis: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor M = A·B with A in SU(2) and B in K.
    Factor {
        /// `identity`, eight comma-separated numbers (re, im row-major) or a JSON file.
        #[arg(allow_hyphen_values = true)]
        matrix: String,
    },
    /// Write the tensor document of a built-in pair.
    Export {
        pair: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use mpm_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Validation(_)
                | E::NotAntisymmetric { .. }
                | E::Integration { .. }
                | E::Embedding(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check { pair } => commands::check(&pair),
        Command::Simulate {
            config,
            pair,
            hamiltonian,
            initial,
            dt,
            t_end,
            convention,
            mode,
            invariants,
            seed,
            out,
        } => {
            let base = match config {
                Some(path) => RunConfig::from_file(&path)?,
                None => RunConfig::default(),
            };
            let flags = RunConfig {
                pair,
                hamiltonian,
                initial: initial.map(|n| n.0),
                dt,
                t_end,
                convention,
                mode,
                invariants: invariants.as_deref().map(parse_list),
                seed,
                out,
            };
            commands::simulate(base.merged(flags).resolve()?)
        }
        Command::Audit {
            pair,
            forms,
            samples,
            seed,
            json,
            out,
        } => commands::audit(
            &pair,
            matches!(forms, Forms::Printed),
            samples,
            seed,
            json,
            out.as_deref(),
        ),
        Command::Derive { basis, out } => commands::derive(&basis, out.as_deref()),
        Command::Factor { matrix } => commands::factor(&matrix),
        Command::Export { pair, out } => commands::export(&pair, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
