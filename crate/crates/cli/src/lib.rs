//! Command implementations behind the `skyrelay` binary.

pub mod args;
pub mod commands;
pub mod report;
pub mod solve;
pub mod sweep;
mod svg;

pub use commands::run;
pub use solve::UsageError;
