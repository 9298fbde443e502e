//! Files, sweeps and the command line around `bandit-lab-core`.
//!
//! * [`config`]: the JSON configuration document.
//! * [`formats`]: value-table files and JSON-lines logs.
//! * [`bench`]: worker pools, parameter sweeps and the results CSV.

pub mod bench;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{LabError, LabResult};
