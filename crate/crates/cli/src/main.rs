//! `q2sat`: instance generation, exact evolution, trajectory sampling,
//! decisions, the classical baseline and invariant checks.
//!
//! Exit codes: 0 YES/ok, 1 NO/not found, 2 usage, 3 capacity, 4 verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

pub const EXIT_NO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

/// Largest n for dense density-matrix work.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest n for state-vector sampling.
pub const MAX_SAMPLE_QUBITS: usize = 20;

#[derive(Parser, Debug)]
#[command(
    name = "q2sat",
    version,
    about = "Random-walk experiments for Quantum 2-SAT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Kind {
    Restricted,
    Extended,
    NoCompletePair,
    NoRandom,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Restricted,
    Extended,
}

impl From<VariantArg> for q2sat::decision::Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Restricted => q2sat::decision::Variant::Restricted,
            VariantArg::Extended => q2sat::decision::Variant::Extended,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Lemma1,
    Dual,
    Oracle,
    Appendix,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random instance file.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short = 'n')]
        n: usize,
        /// Clause count (ignored for no-complete-pair).
        #[arg(short = 'L')]
        l: Option<usize>,
        /// Share of |11⟩ clauses for --kind extended.
        #[arg(long, default_value_t = 0.3)]
        type_ii_fraction: f64,
        /// Required minimum energy for --kind no-random.
        #[arg(long, default_value_t = 0.05)]
        c_target: f64,
        /// Hide the planted frame behind random single-qubit rotations.
        #[arg(long)]
        conjugate: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Exact channel evolution from the maximally mixed state.
    Evolve {
        instance: PathBuf,
        #[arg(short = 'T', long = "steps")]
        steps: usize,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Trajectory ensemble; writes per-trajectory zero counts.
    Sample {
        instance: PathBuf,
        #[arg(short = 'T', long = "steps")]
        steps: usize,
        #[arg(short = 'M', long = "trajectories")]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Run the decision procedure once.
    Decide {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "restricted")]
        variant: VariantArg,
        #[arg(long)]
        seed: u64,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Papadimitriou's walk on a DIMACS 2-CNF file.
    Classical {
        cnf: PathBuf,
        /// Budget factor: the walk makes ⌈b·n²⌉ flips.
        #[arg(short = 'b', long)]
        b: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Spectrum of H, its gap and the matching convergence time.
    Spectrum {
        instance: PathBuf,
        /// Target ground-space weight for the convergence time.
        #[arg(short = 'p', long, default_value_t = 0.9)]
        p: f64,
        #[arg(long, value_enum, default_value = "restricted")]
        variant: VariantArg,
    },
    /// Run invariant suites on the given instances, or on the bundled ones.
    Verify {
        instances: Vec<PathBuf>,
        #[arg(long = "suite", value_enum)]
        suites: Vec<SuiteArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Human-readable summary of an instance.
    Report { instance: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate {
            kind,
            n,
            l,
            type_ii_fraction,
            c_target,
            conjugate,
            seed,
            out,
        } => commands::generate(kind, n, l, type_ii_fraction, c_target, conjugate, seed, out),
        Command::Evolve {
            instance,
            steps,
            out,
        } => commands::evolve(&instance, steps, out),
        Command::Sample {
            instance,
            steps,
            m,
            seed,
            workers,
            out,
        } => commands::sample(&instance, steps, m, seed, workers, out),
        Command::Decide {
            instance,
            variant,
            seed,
            out,
        } => commands::decide(&instance, variant.into(), seed, out),
        Command::Classical { cnf, b, seed } => commands::classical(&cnf, b, seed),
        Command::Spectrum {
            instance,
            p,
            variant,
        } => commands::spectrum(&instance, p, variant.into()),
        Command::Verify {
            instances,
            suites,
            seed,
            workers,
        } => commands::verify(&instances, &suites, seed, workers),
        Command::Report { instance } => commands::report(&instance),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
