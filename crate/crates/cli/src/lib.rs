//! IO, file formats and the command-line front end for the `ordr2-core`
//! estimation library.

pub mod commands;
pub mod error;
pub mod modelio;
pub mod runner;
pub mod schema;
pub mod sensory;
pub mod table;

pub use error::CliError;
