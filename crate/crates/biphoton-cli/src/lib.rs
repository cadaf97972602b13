//! Support library for the `biphoton` binary: range-argument parsing and
//! the CLI-specific CSV schemas, exported so integration tests can parse
//! emitted artifacts back.

pub mod grid;
pub mod table;
