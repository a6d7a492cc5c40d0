use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::Solution;
use crate::error::{Error, Result};
use crate::problem::{MtsProblem, OutlierSet};

/// What the returned estimate is fit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RansacRefit {
    /// Refit on the largest consensus set.
    #[default]
    ConsensusSet,
    /// Keep the minimal-sample hypothesis that produced the largest consensus set.
    BestSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig {
    pub max_iterations: usize,
    /// Defaults to the problem's minimum measurement count.
    pub sample_size: Option<usize>,
    /// Squared-residual cutoff for consensus membership.
    pub inlier_threshold: f64,
    pub seed: u64,
    pub refit: RansacRefit,
}

impl RansacConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

    pub fn new(inlier_threshold: f64, seed: u64) -> Self {
        Self {
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            sample_size: None,
            inlier_threshold,
            seed,
            refit: RansacRefit::default(),
        }
    }
}

/// Minimal-sample RANSAC over any [`MtsProblem`].
///
/// Samples `sample_size` measurements without replacement, fits them, and
/// scores the hypothesis by the number of residuals within the threshold. The
/// first hypothesis reaching the largest count wins. The declared outliers are
/// the complement of its consensus set.
pub fn ransac_run<P: MtsProblem>(problem: &P, config: &RansacConfig) -> Result<Solution<P::Estimate>> {
    let m = problem.measurement_count();
    let v = problem.min_measurements();
    let s = config.sample_size.unwrap_or(v);
    if config.max_iterations == 0 {
        return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
    }
    if s < v {
        return Err(Error::InvalidConfig(format!(
            "sample size {s} is below the solver minimum {v}"
        )));
    }
    if config.inlier_threshold.is_nan() || config.inlier_threshold < 0.0 {
        return Err(Error::InvalidConfig("inlier threshold must be non-negative".into()));
    }
    if m < s {
        return Err(Error::ProblemTooSmall {
            measurements: m,
            required: s,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut solver_calls = 0;
    let mut best: Option<(Vec<usize>, P::Estimate)> = None;
    for _ in 0..config.max_iterations {
        let mut picked = sample(&mut rng, m, s).into_vec();
        picked.sort_unstable();
        solver_calls += 1;
        let Ok(hypothesis) = problem.fit(&picked) else {
            continue;
        };
        let consensus: Vec<usize> = (0..m)
            .filter(|&i| problem.residual(i, &hypothesis) <= config.inlier_threshold)
            .collect();
        if best.as_ref().is_none_or(|(b, _)| consensus.len() > b.len()) {
            let full = consensus.len() == m;
            best = Some((consensus, hypothesis));
            if full {
                break;
            }
        }
    }

    let (consensus, hypothesis) = best.ok_or(Error::NoValidSample)?;
    let estimate = match config.refit {
        RansacRefit::ConsensusSet if consensus.len() >= v => {
            solver_calls += 1;
            problem.fit(&consensus).unwrap_or(hypothesis)
        }
        _ => hypothesis,
    };
    let inliers: OutlierSet = consensus.into_iter().collect();
    let outliers = (0..m).filter(|&i| !inliers.contains(i)).collect();
    Ok(Solution {
        outliers,
        estimate,
        solver_calls,
    })
}
