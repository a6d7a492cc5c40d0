//! Synthetic instance generators, point-cloud ingestion and the chi-square
//! quantile behind the outlier-free bound.

mod chi2;
mod linear;
mod ply;
mod registration;

pub use chi2::{chi2_cdf, chi2_quantile, ln_gamma, regularized_gamma_p};
pub use linear::{gen_linear, LinearScenario, LinearTruth, OUTLIER_SEPARATION_PROBABILITY};
pub use ply::{load_ply, parse_ply, PlyError};
pub use registration::{gen_registration, RegistrationScenario, RegistrationTruth};

use nalgebra::{Matrix3, Quaternion, UnitQuaternion};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solvers::Point3;

/// Uniformly distributed rotation (normalized Gaussian quaternion).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    loop {
        let q = Quaternion::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 1e-9 {
            return *UnitQuaternion::from_quaternion(q).to_rotation_matrix().matrix();
        }
    }
}

/// Largest pairwise distance, by exhaustive comparison.
pub fn diameter(points: &[Point3]) -> f64 {
    let mut best = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            best = best.max((p - q).norm_squared());
        }
    }
    best.sqrt()
}

/// Axis-aligned bounding box `(min, max)`; zeros for an empty cloud.
pub fn bounding_box(points: &[Point3]) -> (Point3, Point3) {
    let Some(first) = points.first() else {
        return (Point3::zeros(), Point3::zeros());
    };
    points
        .iter()
        .fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)))
}

/// Uniform subsample without replacement, keeping file order.
pub fn downsample(points: &[Point3], target: usize, seed: u64) -> Result<Vec<Point3>> {
    if target > points.len() {
        return Err(Error::TargetTooLarge {
            target,
            available: points.len(),
        });
    }
    if target == points.len() {
        return Ok(points.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, points.len(), target).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| points[i]).collect())
}
