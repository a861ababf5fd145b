//! Scenario-driven front end for the alternating-WKB library.
//!
//! The crate is split into a declarative [`config`] layer (JSON scenario
//! files with strict validation), an [`output`] layer (deterministic CSV or
//! JSON data files plus a digest manifest), and a [`commands`] layer that
//! turns a validated scenario into tables by calling into the `awkb`
//! library. The `awkb` binary wires these together behind a clap interface.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::ScenarioConfig;
pub use error::CliError;
