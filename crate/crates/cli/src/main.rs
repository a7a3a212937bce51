//! `weil-census`: enumeration, cyclicity counts and verification runs over
//! isogeny classes of abelian varieties over finite fields.
//!
//! Exit codes: 0 success, 1 a check or verification failed, 2 invalid
//! configuration, 3 a size cap was exceeded.

mod commands;
mod verify;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "weil-census", version, about = "Cyclicity statistics for isogeny classes of abelian varieties over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Field sizes (prime powers), comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Vec<u64>,
    /// Every prime power in the inclusive range `a:b`
    #[arg(long = "q-range", global = true)]
    pub q_range: Option<String>,
    /// Dimension(s); `verify` accepts a list
    #[arg(long, global = true, value_delimiter = ',')]
    pub g: Vec<usize>,
    /// Prime set S, comma separated
    #[arg(long = "S", global = true, value_delimiter = ',')]
    pub s: Option<Vec<u64>>,
    /// Use S(N), all primes up to N
    #[arg(long = "N", global = true)]
    pub n: Option<u64>,
    /// `ordinary` or `with-candidates`
    #[arg(long, global = true, default_value = "ordinary")]
    pub mode: String,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every Monte Carlo stream
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 runs serially
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long = "cache-dir", global = true, env = "WEIL_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate classes and write one cache file per field
    Enumerate,
    /// Count classes with non-trivial and non-cyclic S-part
    Classify,
    /// Cyclic fraction for a single prime along a ladder of fields
    Limits {
        /// Keep only fields with q ≡ CLASS (mod ℓ)
        #[arg(long)]
        class: Option<u64>,
        /// Keep only prime fields
        #[arg(long)]
        primes_only: bool,
    },
    /// Bounds from the Euler products σ₁, σ₂, σ₃
    SigmaTable,
    /// Exhaustive residue-class counts modulo F²
    ResidueCount,
    /// Lattice-point counts against volume predictions
    LatticeVerify {
        #[arg(long, default_value = "Lambda")]
        kind: String,
        /// Residue shift m, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        shift: Vec<i64>,
        /// Monte Carlo samples for the volume of V_g
        #[arg(long)]
        samples: Option<u64>,
        /// Report ordinary counts against the L/R envelope instead
        #[arg(long)]
        envelope: bool,
    },
    /// Run the residue, lattice and sigma checks and report pass/fail
    Verify {
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Cap(String),
    Failed(String),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) | Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) => write!(f, "invalid configuration: {m}"),
            Failure::Cap(m) => write!(f, "size cap exceeded: {m}"),
            Failure::Failed(m) => write!(f, "failed: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<weil_census::Error> for Failure {
    fn from(e: weil_census::Error) -> Self {
        match e {
            weil_census::Error::Io(io) => Failure::Io(io),
            e if e.is_cap() => Failure::Cap(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(w) = cli.common.workers {
        if w == 0 {
            return Err(Failure::Invalid("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure::Invalid(e.to_string()))?;
    }
    let c = &cli.common;
    match &cli.command {
        Command::Enumerate => commands::enumerate(c),
        Command::Classify => commands::classify(c),
        Command::Limits { class, primes_only } => commands::limits(c, *class, *primes_only),
        Command::SigmaTable => commands::sigma_table(c),
        Command::ResidueCount => commands::residue_count(c),
        Command::LatticeVerify {
            kind,
            shift,
            samples,
            envelope,
        } => commands::lattice_verify(c, kind, shift, *samples, *envelope),
        Command::Verify { mutate } => verify::run(c, mutate.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weil-census: {e}");
            ExitCode::from(e.code())
        }
    }
}
