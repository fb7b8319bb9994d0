//! `momentkit` command-line front end.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use momentkit::Error;

use report::Format;

#[derive(Parser, Debug)]
#[command(
    name = "momentkit",
    version,
    about = "Hamburger moment sequence analysis"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Hamburger,
    Stieltjes,
    Hausdorff,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positivity test with the table of Hankel determinants.
    Analyze {
        seq_file: PathBuf,
        /// Largest Hankel order; defaults to the largest the terms allow.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = TestKind::Hamburger)]
        test: TestKind,
    },
    /// Extract a subsequence through a mask, optionally testing it.
    Extract {
        seq_file: PathBuf,
        mask_file: PathBuf,
        /// Number of extracted terms; defaults to as many as the input allows.
        #[arg(long)]
        count: Option<usize>,
        /// Run the pattern check and the Hankel test on the extraction.
        #[arg(long)]
        check: bool,
    },
    /// Decide whether a mask keeps every positive sequence positive.
    MaskCheck {
        mask_file: PathBuf,
        /// Largest Hankel order examined for explicit masks.
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Weyl circles at a spectral point, with the nesting table.
    Weyl {
        seq_file: PathBuf,
        /// Spectral parameter `a+bi` with `b != 0`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Circle orders `n1..n2` (inclusive); defaults to every available order.
        #[arg(long)]
        orders: Option<String>,
        /// Parameters `τ` whose points `w_n(λ, τ)` are reported on each circle.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        tau: Vec<f64>,
    },
    /// Carleman sums, radius decay and a determinacy verdict.
    Determinacy {
        seq_file: PathBuf,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Spectral point for the radius sequence.
        #[arg(long, default_value = "0+1i", allow_hyphen_values = true)]
        probe: String,
    },
    /// Complete a partial Hankel matrix given by skew-diagonal values.
    Complete {
        partial_file: PathBuf,
        /// Highest index of the completed sequence.
        #[arg(long, default_value_t = 8)]
        target_depth: usize,
    },
    /// Write a sequence file for a named family.
    Generate {
        #[command(subcommand)]
        family: commands::Family,
        #[arg(long, default_value_t = 16, global = true)]
        count: usize,
        /// Output path; stdout when absent.
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

/// Exit status for a library error: 2 for unusable input, 1 for a negative
/// verdict surfacing as an error, 3 for numerical failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidArgument(_)
        | Error::InsufficientTerms { .. }
        | Error::IndexOutOfRange { .. }
        | Error::TooFewIndices { .. }
        | Error::RealLambda => 2,
        Error::NotPositive(_) | Error::NotPositiveDefinite { .. } => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bits = match commands::precision_bits() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command, cli.format, bits) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
