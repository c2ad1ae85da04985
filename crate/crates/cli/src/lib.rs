//! Command-line front end for `weyl-core`: configuration, commands and
//! artifact writers. The `weyl` binary is a thin clap wrapper over
//! [`commands`].

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    cmd_couette, cmd_cylinder, cmd_fluid_check, cmd_solve, cmd_verify, CommandOutcome,
};
pub use config::{Overrides, RunConfig};
pub use error::CliError;
