use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::datagen::chi2_quantile;
use crate::error::{Error, Result};
use crate::problem::OutlierSet;
use crate::solvers::LinearProblem;

/// Planted outliers must exceed this chi-square quantile (1 dof) in
/// normalized squared error.
pub const OUTLIER_SEPARATION_PROBABILITY: f64 = 0.99;

const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScenario {
    pub n: usize,
    pub m: usize,
    pub outlier_fraction: f64,
    pub inlier_noise_sigma: f64,
    /// Absolute outlier offsets are drawn uniformly from this range.
    pub outlier_magnitude_range: (f64, f64),
    pub seed: u64,
}

impl LinearScenario {
    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.m as f64).round() as usize
    }

    /// Scenario with exactly `k` planted outliers.
    pub fn with_outlier_count(mut self, k: usize) -> Self {
        self.outlier_fraction = k as f64 / self.m as f64;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTruth {
    pub x: DVector<f64>,
    pub outliers: OutlierSet,
    pub noise_sigma: f64,
}

/// Standard-normal design rows, Gaussian inlier noise, and outliers offset by
/// a random-sign uniform magnitude. Outliers are redrawn until their error at
/// the planted parameter clears the 0.99 chi-square budget.
pub fn gen_linear(scenario: &LinearScenario) -> Result<(LinearProblem, LinearTruth)> {
    let LinearScenario {
        n,
        m,
        inlier_noise_sigma: sigma,
        outlier_magnitude_range: (lo, hi),
        ..
    } = *scenario;
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!("need m >= n >= 1, got m = {m}, n = {n}")));
    }
    if !(0.0..=1.0).contains(&scenario.outlier_fraction) {
        return Err(Error::InvalidConfig("outlier fraction must lie in [0, 1]".into()));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig("inlier noise sigma must be non-negative".into()));
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidConfig(
            "outlier magnitude range must satisfy 0 < lo <= hi".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let x: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let design: DMatrix<f64> = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    let clean = &design * &x;
    let mut y = DVector::from_fn(m, |i, _| {
        let d: f64 = StandardNormal.sample(&mut rng);
        clean[i] + sigma * d
    });

    let outliers: OutlierSet = sample(&mut rng, m, scenario.outlier_count()).into_iter().collect();
    let threshold = chi2_quantile(OUTLIER_SEPARATION_PROBABILITY, 1) * sigma * sigma;
    for i in outliers.iter() {
        let mut accepted = false;
        for _ in 0..MAX_REDRAWS {
            let d: f64 = StandardNormal.sample(&mut rng);
            let magnitude = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let candidate: f64 = clean[i] + sigma * d + sign * magnitude;
            if (candidate - clean[i]).powi(2) > threshold {
                y[i] = candidate;
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::InvalidConfig(
                "outlier magnitudes cannot clear the chi-square separation".into(),
            ));
        }
    }

    Ok((
        LinearProblem::new(design, y)?,
        LinearTruth {
            x,
            outliers,
            noise_sigma: sigma,
        },
    ))
}
