//! Command implementations behind the `chainhawkes` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
