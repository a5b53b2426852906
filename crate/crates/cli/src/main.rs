//! `gpn`: generate instances, train models, solve, and benchmark.

use std::process::ExitCode;

use clap::Parser;

use gpn_cli::commands::{self, Cli, CliError};

fn main() -> ExitCode {
    // GPN_THREADS caps worker parallelism for training and benches.
    if let Ok(value) = std::env::var("GPN_THREADS") {
        match value.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("error: GPN_THREADS must be a positive integer, got '{value}'");
                return ExitCode::from(1);
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own message; keep exit code 1 for usage errors.
            let _ = err.print();
            return ExitCode::from(1);
        }
    };

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Core(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// 2 for data problems (parsing, files, checkpoints), 3 for numeric
/// failures inside a computation.
fn exit_code_for(err: &gpn_core::Error) -> u8 {
    use gpn_core::Error::*;
    match err {
        UnknownFormat(_) | DimensionMismatch(_) | MalformedHeader(_) | MalformedNumber(_)
        | IndexOutOfRange(_) | NotAPermutation(_) | TooLarge { .. } | Io(_)
        | VersionMismatch { .. } | CorruptCheckpoint(_) => 2,
        NonFiniteValue(_) | AllMasked | NotScalar | TapeConsumed | ShapeMismatch { .. }
        | NonPositiveBest(_) => 3,
    }
}
