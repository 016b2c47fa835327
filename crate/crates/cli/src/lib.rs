//! Command-line front end: configuration files, output formats and a
//! thread-pool executor around `polling-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod output;

pub use cli::run;
