use itertools::Itertools;

use crate::baselines::Solution;
use crate::error::{Error, Result};
use crate::problem::{evaluate, MtsProblem, OutlierFreeBound, OutlierSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub bound: OutlierFreeBound,
    pub max_measurements: usize,
}

impl OracleConfig {
    pub const DEFAULT_CAP: usize = 20;
    /// Exhaustive search beyond this many measurements is refused outright.
    pub const HARD_CAP: usize = 25;

    pub fn new(bound: OutlierFreeBound, max_measurements: usize) -> Result<Self> {
        if max_measurements > Self::HARD_CAP {
            return Err(Error::InvalidConfig(format!(
                "oracle cap {max_measurements} exceeds the hard limit {}",
                Self::HARD_CAP
            )));
        }
        Ok(Self {
            bound,
            max_measurements,
        })
    }

    pub fn with_bound(bound: OutlierFreeBound) -> Self {
        Self {
            bound,
            max_measurements: Self::DEFAULT_CAP,
        }
    }
}

fn check_size<P: MtsProblem>(problem: &P, cap: usize) -> Result<usize> {
    let m = problem.measurement_count();
    if m > cap.min(OracleConfig::HARD_CAP) {
        return Err(Error::InstanceTooLarge { measurements: m, cap });
    }
    let v = problem.min_measurements();
    if m < v {
        return Err(Error::ProblemTooSmall {
            measurements: m,
            required: v,
        });
    }
    Ok(m)
}

/// Exact MTS by enumeration: the first rejection, in order of increasing
/// cardinality and then lexicographically, whose inliers fit within
/// `|M \ O| * eps`.
pub fn brute_force_mts<P: MtsProblem>(problem: &P, config: &OracleConfig) -> Result<Solution<P::Estimate>> {
    let m = check_size(problem, config.max_measurements)?;
    let v = problem.min_measurements();
    let mut solver_calls = 0;
    for k in 0..=(m - v) {
        for rejected in (0..m).combinations(k) {
            let outliers = OutlierSet::new(rejected)?;
            solver_calls += 1;
            let Ok(eval) = evaluate(problem, &outliers) else {
                continue;
            };
            if config.bound.admits(eval.total, m - k) {
                return Ok(Solution {
                    outliers,
                    estimate: eval.estimate,
                    solver_calls,
                });
            }
        }
    }
    Err(Error::Infeasible { min_measurements: v })
}

/// `r*_k[j]` for `j = 0..=k_max`: the smallest `r(O)` over all `|O| <= j`.
///
/// Subsets on which the solver is degenerate are skipped; a cardinality with
/// no solvable subset contributes `+inf`.
pub fn rstar_profile<P: MtsProblem>(problem: &P, k_max: usize, cap: usize) -> Result<Vec<f64>> {
    let m = check_size(problem, cap)?;
    let v = problem.min_measurements();
    if k_max > m - v {
        return Err(Error::TooFewInliers {
            inliers: m.saturating_sub(k_max),
            required: v,
        });
    }
    let mut profile = Vec::with_capacity(k_max + 1);
    let mut best = f64::INFINITY;
    for k in 0..=k_max {
        for rejected in (0..m).combinations(k) {
            if let Ok(eval) = evaluate(problem, &OutlierSet::new(rejected)?) {
                best = best.min(eval.total);
            }
        }
        profile.push(best);
    }
    Ok(profile)
}

/// `r*_k`: the optimal residual when at most `k` measurements are rejected.
pub fn brute_force_rstar_k<P: MtsProblem>(problem: &P, k: usize) -> Result<f64> {
    Ok(rstar_profile(problem, k, OracleConfig::DEFAULT_CAP)?[k])
}
