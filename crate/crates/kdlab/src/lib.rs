//! File formats, experiment sweeps and the command-line front end for
//! [`kdlab_core`].
//!
//! Instances are JSON files tagged by `kind` (`explicit`, `ap`, `ex33`); single
//! solves produce JSON result files, sweeps and diagnostics produce CSV tables
//! (or JSON when the output path ends in `.json`).

pub mod commands;
pub mod error;
pub mod instance;
pub mod json;
pub mod result;
pub mod tables;

pub use error::{CliError, Result};
pub use instance::InstanceFile;
pub use result::ResultFile;
