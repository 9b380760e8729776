//! Configuration, dispatch and persistence behind the `hallnum` binary.
//!
//! Exit statuses: 0 on success, 2 when some realizations failed, 1 on a
//! fatal error (bad configuration, unwritable output, resource caps).

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_str, ConfigError, Experiment, RunConfig};
pub use output::{Manifest, Table};
pub use run::{dispatch, Outcome, Overrides};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "HALLNUM_WORKERS";
