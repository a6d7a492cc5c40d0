//! Comparison algorithms: minimal-sample RANSAC, greedy trimming and the
//! exhaustive MTS oracle.

mod greedy;
mod oracle;
mod ransac;

pub use greedy::{greedy_trim, greedy_until_bound};
pub use oracle::{brute_force_mts, brute_force_rstar_k, rstar_profile, OracleConfig};
pub use ransac::{ransac_run, RansacConfig, RansacRefit};

use crate::problem::OutlierSet;

/// A rejection decision together with the estimate fit to the kept measurements.
#[derive(Debug, Clone)]
pub struct Solution<E> {
    pub outliers: OutlierSet,
    pub estimate: E,
    pub solver_calls: usize,
}
