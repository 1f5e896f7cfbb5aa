//! Standard-library companion to `boxgal-core`: law and config file syntax,
//! spectrum dumps, multi-threaded Monte Carlo and the `boxgal` command line.

pub mod cache;
pub mod cli;
pub mod config;
pub mod law;
pub mod parallel;
pub mod report;
