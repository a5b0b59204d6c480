//! Command implementations behind the `gravlab` binary.

pub mod commands;
