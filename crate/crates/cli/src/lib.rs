//! Batch front-end for `plurikit`: JSON run configurations and the commands
//! that turn them into report directories.

pub mod commands;
pub mod config;
