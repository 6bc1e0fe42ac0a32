//! File formats, bundled fixtures, parallel drivers, plots and the command
//! line for `gasmor-core`.

pub mod formats;
pub mod fixtures;
pub mod parallel;
pub mod plot;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod commands;
