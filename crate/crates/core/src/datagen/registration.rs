use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::datagen::{bounding_box, diameter, downsample, random_rotation};
use crate::error::{Error, Result};
use crate::problem::OutlierSet;
use crate::solvers::{Point3, RegistrationProblem, RigidTransform};

/// Synthetic registration instance: a cloud `P` centered at the origin, a copy
/// moved by a random rigid transform with Gaussian noise, and a fraction of the
/// moved points replaced by uniform samples from the bounding box of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationScenario {
    pub n_points: usize,
    pub outlier_fraction: f64,
    /// Noise standard deviation (per axis) as a fraction of the cloud diameter.
    pub noise_sigma_frac: f64,
    pub seed: u64,
    /// Translation components are uniform in `[-f, f]` times the diameter.
    pub max_translation_frac: f64,
    /// Cloud to register. When absent, points are drawn uniformly from the
    /// unit cube. Larger clouds are subsampled to `n_points`. Either way the
    /// cloud is shifted so its centroid sits at the origin.
    pub source: Option<Vec<Point3>>,
}

impl RegistrationScenario {
    pub const DEFAULT_MAX_TRANSLATION_FRAC: f64 = 0.1;

    pub fn new(n_points: usize, outlier_fraction: f64, noise_sigma_frac: f64, seed: u64) -> Self {
        Self {
            n_points,
            outlier_fraction,
            noise_sigma_frac,
            seed,
            max_translation_frac: Self::DEFAULT_MAX_TRANSLATION_FRAC,
            source: None,
        }
    }

    pub fn with_source(mut self, cloud: Vec<Point3>) -> Self {
        self.source = Some(cloud);
        self
    }

    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.n_points as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationTruth {
    pub transform: RigidTransform,
    pub outliers: OutlierSet,
    pub diameter: f64,
    pub noise_sigma: f64,
    /// Axis-aligned bounding box of the source cloud, `(min, max)`.
    pub bounding_box: (Point3, Point3),
}

pub fn gen_registration(scenario: &RegistrationScenario) -> Result<(RegistrationProblem, RegistrationTruth)> {
    let n = scenario.n_points;
    if n < 4 {
        return Err(Error::InvalidConfig(format!("need at least 4 points, got {n}")));
    }
    if !(0.0..=1.0).contains(&scenario.outlier_fraction) {
        return Err(Error::InvalidConfig("outlier fraction must lie in [0, 1]".into()));
    }
    if !(scenario.noise_sigma_frac >= 0.0 && scenario.noise_sigma_frac.is_finite()) {
        return Err(Error::InvalidConfig("noise fraction must be non-negative".into()));
    }
    if !(scenario.max_translation_frac >= 0.0 && scenario.max_translation_frac.is_finite()) {
        return Err(Error::InvalidConfig("translation bound must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let mut source = match &scenario.source {
        Some(cloud) => downsample(cloud, n, rng.random())?,
        None => (0..n)
            .map(|_| Point3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()))
            .collect(),
    };
    let centroid = source.iter().sum::<Point3>() / n as f64;
    for p in &mut source {
        *p -= centroid;
    }
    let diameter = diameter(&source);
    let sigma = scenario.noise_sigma_frac * diameter;
    let (lo, hi) = bounding_box(&source);

    let rotation = random_rotation(&mut rng);
    let translation = Point3::new(
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
        rng.random_range(-1.0..=1.0),
    ) * (scenario.max_translation_frac * diameter);
    let transform = RigidTransform { rotation, translation };

    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut target: Vec<Point3> = source
        .iter()
        .map(|p| {
            let d = Point3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            transform.apply(p) + d
        })
        .collect();

    let outliers: OutlierSet = sample(&mut rng, n, scenario.outlier_count()).into_iter().collect();
    for i in outliers.iter() {
        target[i] = Point3::from_fn(|k, _| {
            if hi[k] > lo[k] {
                rng.random_range(lo[k]..=hi[k])
            } else {
                lo[k]
            }
        });
    }

    let problem = RegistrationProblem::new(source, target)?;
    Ok((
        problem,
        RegistrationTruth {
            transform,
            outliers,
            diameter,
            noise_sigma: sigma,
            bounding_box: (lo, hi),
        },
    ))
}
