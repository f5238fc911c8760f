//! `mcount`: count finite models, eliminate hard-wired constants, build
//! the ternary counterexample and analyse residue sequences.
//!
//! Exit codes: 0 success, 1 user error, 2 resource limit, 3 internal
//! invariant failure (an elimination that changed a count).

mod commands;
mod output;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn user(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn budget(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<mcount_core::engine::EngineError> for Failure {
    fn from(e: mcount_core::engine::EngineError) -> Self {
        if e.is_budget() {
            Failure::budget(e.to_string())
        } else {
            Failure::user(e.to_string())
        }
    }
}

/// Parses `A..B`, `A..=B` or `A` as an inclusive range.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected a non-negative integer, found {t:?}"))
    };
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let a = num(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty range {s}"));
    }
    Ok(a..=b)
}

#[derive(Debug, Parser)]
#[command(
    name = "mcount",
    version,
    about = "Finite model counting and constant elimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Builtin class, as NAME or NAME:params (see `mcount list`).
    #[arg(long, value_name = "NAME[:params]")]
    pub builtin: Option<String>,
    /// Class specification file in the s-expression format.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct Engine {
    /// Worker threads for the model search.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    /// Largest interpretation space to search, in bits.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub budget: u64,
    /// Counting strategy (see `mcount list`).
    #[arg(long, default_value = "pruned")]
    pub strategy: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count models of a class for each n in a range.
    Count {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_range, value_name = "A..B")]
        n: RangeInclusive<usize>,
        /// Also report counts modulo M.
        #[arg(long = "mod", value_name = "M", value_parser = clap::value_parser!(u64).range(2..))]
        modulus: Option<u64>,
        #[command(flatten)]
        engine: Engine,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Remove the last hard-wired constant and check the counts agree.
    Eliminate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "many-one", value_name = "MODE")]
        mode: String,
        /// Values of n on which input and output counts are compared.
        /// Defaults to the sizes whose search spaces fit in 20 bits.
        #[arg(long, value_parser = parse_range, value_name = "A..B")]
        verify: Option<RangeInclusive<usize>>,
        /// Accept a class without constants and copy it unchanged.
        #[arg(long)]
        allow_noop: bool,
        #[command(flatten)]
        engine: Engine,
        /// Output directory.
        #[arg(long, default_value = "eliminated")]
        out: PathBuf,
    },
    /// Write the ternary counterexample, its trimming stages and the
    /// oracle count table.
    Witness {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 16)]
        max_n: u64,
        /// Output directory.
        #[arg(long, default_value = "witness")]
        out: PathBuf,
    },
    /// Detect periodicity and linear recurrences of a residue sequence.
    Analyze {
        /// Sequence file with columns n,residue.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["builtin", "spec", "oracle"])]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "NAME[:params]", conflicts_with_all = ["spec", "oracle"])]
        builtin: Option<String>,
        #[arg(long, value_name = "PATH", conflicts_with = "oracle")]
        spec: Option<PathBuf>,
        #[arg(long, value_name = "NAME[:params]")]
        oracle: Option<String>,
        #[arg(long, value_parser = parse_range, value_name = "A..B")]
        n: Option<RangeInclusive<usize>>,
        #[arg(long = "mod", value_name = "M", value_parser = clap::value_parser!(u64).range(2..))]
        modulus: Option<u64>,
        /// Largest recurrence order tried for prime moduli.
        #[arg(long, default_value_t = 6)]
        max_order: usize,
        /// Full repetitions required before a period is reported.
        #[arg(long, default_value_t = 2)]
        threshold: usize,
        /// Known bound on preperiod and period, as R,P.
        #[arg(long, value_name = "R,P")]
        bound: Option<String>,
        #[command(flatten)]
        engine: Engine,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print values of a named sequence oracle.
    Oracle {
        #[arg(long, value_name = "NAME[:params]")]
        name: String,
        #[arg(long, value_parser = parse_range, value_name = "A..B")]
        n: RangeInclusive<usize>,
        #[arg(long = "mod", value_name = "M", value_parser = clap::value_parser!(u64).range(2..))]
        modulus: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List builtin classes, strategies, eliminators and oracles.
    List,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Count {
            source,
            n,
            modulus,
            engine,
            out,
            format,
        } => commands::count(&source, n, modulus, &engine, out.as_deref(), format),
        Command::Eliminate {
            source,
            mode,
            verify,
            allow_noop,
            engine,
            out,
        } => commands::eliminate(&source, &mode, verify, allow_noop, &engine, &out),
        Command::Witness { p, max_n, out } => commands::witness(p, max_n, &out),
        Command::Analyze {
            csv,
            builtin,
            spec,
            oracle,
            n,
            modulus,
            max_order,
            threshold,
            bound,
            engine,
            out,
        } => {
            let input = match (csv, builtin, spec, oracle) {
                (Some(p), ..) => commands::SeqInput::Csv(p),
                (_, Some(b), ..) => commands::SeqInput::Class(Source {
                    builtin: Some(b),
                    spec: None,
                }),
                (_, _, Some(s), _) => commands::SeqInput::Class(Source {
                    builtin: None,
                    spec: Some(s),
                }),
                (.., Some(o)) => commands::SeqInput::Oracle(o),
                _ => {
                    return Err(Failure::user(
                        "one of --csv, --builtin, --spec or --oracle is required",
                    ))
                }
            };
            let opts = commands::AnalyzeOptions {
                n,
                modulus,
                max_order,
                threshold,
                bound,
            };
            commands::analyze(&input, &opts, &engine, out.as_deref())
        }
        Command::Oracle {
            name,
            n,
            modulus,
            out,
            format,
        } => commands::oracle(&name, n, modulus, out.as_deref(), format),
        Command::List => commands::list(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mcount: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..5"), Ok(1..=5));
        assert_eq!(parse_range("1..=5"), Ok(1..=5));
        assert_eq!(parse_range("3"), Ok(3..=3));
        assert!(parse_range("5..1").is_err());
        assert!(parse_range("a..2").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
