use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result, SolverError};
use crate::problem::{MeasurementIndex, MtsProblem};

pub type Point3 = Vector3<f64>;

/// Singular values of the cross-covariance below this fraction of the
/// largest one are treated as zero.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Rotation plus translation: `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub const ORTHONORMALITY_TOL: f64 = 1e-9;

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Checked constructor: `R` must be a proper rotation to within 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let t = Self { rotation, translation };
        if !t.is_proper(Self::ORTHONORMALITY_TOL) {
            return Err(Error::InvalidConfig("rotation is not in SO(3)".into()));
        }
        Ok(t)
    }

    pub fn is_proper(&self, tol: f64) -> bool {
        let orth = (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm();
        let det = self.rotation.determinant();
        orth <= tol && (det - 1.0).abs() <= tol && self.translation.iter().all(|v| v.is_finite())
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        self.rotation * p + self.translation
    }
}

/// Putative correspondences `(p_i, p'_j)` between two point clouds.
#[derive(Debug, Clone)]
pub struct RegistrationProblem {
    source: Vec<Point3>,
    target: Vec<Point3>,
}

impl RegistrationProblem {
    /// Index-aligned correspondences: `source[k]` is matched with `target[k]`.
    pub fn new(source: Vec<Point3>, target: Vec<Point3>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::InvalidConfig(format!(
                "{} source points but {} target points",
                source.len(),
                target.len()
            )));
        }
        if source.iter().chain(&target).any(|p| !p.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidConfig("non-finite point coordinate".into()));
        }
        Ok(Self { source, target })
    }

    /// Builds correspondences from explicit `(i, j)` index pairs into two clouds.
    pub fn from_pairs(source: &[Point3], target: &[Point3], pairs: &[(usize, usize)]) -> Result<Self> {
        let mut src = Vec::with_capacity(pairs.len());
        let mut dst = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            let (Some(p), Some(q)) = (source.get(i), target.get(j)) else {
                return Err(Error::InvalidConfig(format!("correspondence ({i}, {j}) out of range")));
            };
            src.push(*p);
            dst.push(*q);
        }
        Self::new(src, dst)
    }

    pub fn source(&self) -> &[Point3] {
        &self.source
    }

    pub fn target(&self) -> &[Point3] {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

/// Closed-form least-squares rigid alignment of the selected correspondences
/// (SVD form of Horn's absolute orientation).
pub fn horn_fit(problem: &RegistrationProblem, inliers: &[MeasurementIndex]) -> Result<RigidTransform, SolverError> {
    if inliers.len() < 3 {
        return Err(SolverError::NotEnoughMeasurements {
            got: inliers.len(),
            required: 3,
        });
    }
    let n = inliers.len() as f64;
    let src_centroid = inliers.iter().map(|&i| problem.source[i]).sum::<Point3>() / n;
    let dst_centroid = inliers.iter().map(|&i| problem.target[i]).sum::<Point3>() / n;

    let mut h = Matrix3::zeros();
    for &i in inliers {
        h += (problem.source[i] - src_centroid) * (problem.target[i] - dst_centroid).transpose();
    }

    let svd = h.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv[0].is_nan() || sv[0] <= 0.0 || sv[1] < DEGENERACY_RATIO * sv[0] {
        return Err(SolverError::DegenerateConfiguration);
    }
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(SolverError::DegenerateConfiguration);
    };
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let translation = dst_centroid - rotation * src_centroid;
    Ok(RigidTransform { rotation, translation })
}

/// `||R p_i + t - p'_j||^2`.
pub fn registration_residual(problem: &RegistrationProblem, index: MeasurementIndex, x: &RigidTransform) -> f64 {
    (x.apply(&problem.source[index]) - problem.target[index]).norm_squared()
}

impl MtsProblem for RegistrationProblem {
    type Estimate = RigidTransform;

    fn measurement_count(&self) -> usize {
        self.source.len()
    }

    fn min_measurements(&self) -> usize {
        3
    }

    fn fit(&self, inliers: &[MeasurementIndex]) -> Result<RigidTransform, SolverError> {
        horn_fit(self, inliers)
    }

    fn residual(&self, index: MeasurementIndex, x: &RigidTransform) -> f64 {
        registration_residual(self, index, x)
    }
}
