//! Experiment registry, configuration and result envelopes behind the
//! `microlocal` binary. Every acceptance criterion is one named experiment.

pub mod config;
pub mod envelope;
pub mod experiments;
pub mod runner;

pub use config::{CliError, ExperimentConfig};
pub use envelope::{Check, Envelope, Table, SCHEMA_VERSION};
pub use experiments::{find, in_group, Group, Spec, REGISTRY};
pub use runner::{run_experiment, write_outputs, Outcome, RunOptions, DEFAULT_SEED};
