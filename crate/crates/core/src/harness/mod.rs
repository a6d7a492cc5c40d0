//! Experiment harness: outlier-fraction sweeps with Monte Carlo repetition,
//! the certificate-versus-optimum experiment on small linear instances, CSV
//! output and plotting scripts.

mod bound;
mod plot;
mod spec;
mod sweep;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::datagen::PlyError;
use crate::error::Error as CoreError;

pub use bound::{run_bound_experiment, write_bound_csv, BoundRow, BOUND_CSV_HEADER, BOUND_EXPERIMENT_CAP};
pub use plot::{bound_plot_script, sweep_plot_script};
pub use spec::{LinearParams, Method, ProblemKind, RegistrationParams, SweepSpec};
pub use sweep::{
    format_summary, run_sweep, sort_records, summarize, trial_seed, write_csv, CellSummary, Stat, CSV_HEADER,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid {field}: {message}")]
    Config { field: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("point cloud: {0}")]
    Ply(#[from] PlyError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{method} failed at outlier fraction {fraction}, trial {trial}: {source}")]
    Method {
        method: &'static str,
        fraction: f64,
        trial: usize,
        #[source]
        source: CoreError,
    },
    #[error("{method}, {planted} planted, trial {trial}: ratio {ratio} exceeds chi {chi}")]
    BoundViolated {
        method: String,
        planted: usize,
        trial: usize,
        ratio: f64,
        chi: f64,
    },
}

impl HarnessError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
