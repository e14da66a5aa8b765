//! Command-line front end: configuration, presets, runs, sweeps and the
//! CSV/JSON artifacts they emit.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod sweep;
