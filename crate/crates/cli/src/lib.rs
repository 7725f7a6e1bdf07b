//! Configuration, certificates and pipeline stages of the `bridgewave`
//! command-line tool.

pub mod certificate;
pub mod commands;
pub mod config;
pub mod report;

pub use certificate::Certificate;
pub use config::{Config, ProblemParams};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli_chapter {}
