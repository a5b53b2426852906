//! Library surface of the `gpn` binary: argument types, subcommand
//! implementations, and the benchmark report model.

pub mod commands;
pub mod report;
