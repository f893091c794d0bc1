//! Command-line front end for the auctionlab library.

pub mod commands;
pub mod fixtures;
pub mod report;

pub use commands::{execute, exit_code, Cli, UsageError};
