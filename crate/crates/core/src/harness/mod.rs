//! File formats and the command implementations behind the `fdvar` binary.

pub mod cli;
pub mod commands;
pub mod format;
pub mod io;
pub mod verify;
