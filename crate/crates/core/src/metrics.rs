//! Error metrics and per-trial records.

use nalgebra::{Matrix3, Vector3};

use crate::bounds::ChiBound;
use crate::problem::OutlierSet;

/// Geodesic distance on SO(3): the angle of `R_est^T R_true`, in `[0, pi]`.
///
/// Evaluated as `atan2(sin, cos)` of the relative rotation, with the cosine
/// `(trace - 1) / 2` clamped to `[-1, 1]`. This is the same angle as the
/// arccos form but keeps full precision near zero.
pub fn rotation_error(r_est: &Matrix3<f64>, r_true: &Matrix3<f64>) -> f64 {
    let rel = r_est.transpose() * r_true;
    let cos = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = Vector3::new(
        rel[(2, 1)] - rel[(1, 2)],
        rel[(0, 2)] - rel[(2, 0)],
        rel[(1, 0)] - rel[(0, 1)],
    );
    let sin = (skew.norm() / 2.0).min(1.0);
    sin.atan2(cos)
}

pub fn translation_error(t_est: &Vector3<f64>, t_true: &Vector3<f64>) -> f64 {
    (t_est - t_true).norm()
}

/// True/false positive rates of a declared outlier set against the planted
/// one.
///
/// `tpr = |declared & planted| / |planted|` (1 when nothing was planted) and
/// `fpr = |declared \ planted| / (m - |planted|)` (0 when every measurement
/// was planted).
pub fn classification_rates(declared: &OutlierSet, planted: &OutlierSet, m: usize) -> (f64, f64) {
    let hits = declared.intersection_len(planted);
    let false_alarms = declared.len() - hits;
    let tpr = if planted.is_empty() {
        1.0
    } else {
        hits as f64 / planted.len() as f64
    };
    let negatives = m.saturating_sub(planted.len());
    let fpr = if negatives == 0 {
        0.0
    } else {
        false_alarms as f64 / negatives as f64
    };
    (tpr, fpr)
}

/// One row of a sweep: a method run on one generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: String,
    pub outlier_fraction: f64,
    pub trial: usize,
    pub seed: u64,
    /// Radians; absent for linear problems.
    pub rotation_error: Option<f64>,
    /// Cloud units; absent for linear problems.
    pub translation_error: Option<f64>,
    pub tpr: f64,
    pub fpr: f64,
    pub chi: ChiBound,
    pub solver_calls: usize,
    /// Seconds spent inside the method call.
    pub wall_time: f64,
}
