use crate::baselines::Solution;
use crate::error::{Error, Result};
use crate::problem::{Evaluator, MtsProblem, OutlierFreeBound, OutlierSet};

/// Rejects `k` measurements one at a time, each time removing the one whose
/// removal leaves the smallest residual `r(O + {i})`. Ties go to the lower index.
pub fn greedy_trim<P: MtsProblem>(problem: &P, k: usize) -> Result<Solution<P::Estimate>> {
    let m = problem.measurement_count();
    let v = problem.min_measurements();
    if m < v + k {
        return Err(Error::TooFewInliers {
            inliers: m.saturating_sub(k),
            required: v,
        });
    }
    let mut ev = Evaluator::new(problem);
    let mut outliers = OutlierSet::empty();
    for _ in 0..k {
        outliers = greedy_step(&mut ev, &outliers)?;
    }
    let estimate = ev.evaluate(&outliers)?.estimate.clone();
    Ok(Solution {
        outliers,
        estimate,
        solver_calls: ev.solver_calls(),
    })
}

/// Greedy trimming without a preset `k`: keeps rejecting until the inliers
/// fit within the outlier-free budget or only `v` measurements remain.
pub fn greedy_until_bound<P: MtsProblem>(problem: &P, bound: &OutlierFreeBound) -> Result<Solution<P::Estimate>> {
    let m = problem.measurement_count();
    let v = problem.min_measurements();
    if m < v {
        return Err(Error::ProblemTooSmall {
            measurements: m,
            required: v,
        });
    }
    let mut ev = Evaluator::new(problem);
    let mut outliers = OutlierSet::empty();
    loop {
        let total = ev.total_residual(&outliers)?;
        if bound.admits(total, m - outliers.len()) || m - outliers.len() == v {
            break;
        }
        outliers = greedy_step(&mut ev, &outliers)?;
    }
    let estimate = ev.evaluate(&outliers)?.estimate.clone();
    Ok(Solution {
        outliers,
        estimate,
        solver_calls: ev.solver_calls(),
    })
}

fn greedy_step<P: MtsProblem>(ev: &mut Evaluator<'_, P>, current: &OutlierSet) -> Result<OutlierSet> {
    let m = ev.problem().measurement_count();
    let mut best: Option<(f64, OutlierSet)> = None;
    let mut last_err = None;
    for i in (0..m).filter(|&i| !current.contains(i)) {
        let mut candidate = current.clone();
        candidate.insert(i);
        match ev.total_residual(&candidate) {
            Ok(r) => {
                if best.as_ref().is_none_or(|(b, _)| r < *b) {
                    best = Some((r, candidate));
                }
            }
            Err(e @ Error::SolverDegenerate(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    match best {
        Some((_, set)) => Ok(set),
        None => Err(last_err.unwrap_or(Error::NoValidSample)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::brute_force_rstar_k;
    use crate::problem::{evaluate, total_residual};
    use crate::solvers::LinearProblem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_gross_outlier() {
        let p = LinearProblem::scalar(&[1.0, 1.2, 0.9, 1.1, 25.0, 0.95]).unwrap();
        // oracle: enumerate single removals directly
        let best = (0..6)
            .min_by(|&a, &b| {
                let ra = total_residual(&p, &OutlierSet::new(vec![a]).unwrap()).unwrap();
                let rb = total_residual(&p, &OutlierSet::new(vec![b]).unwrap()).unwrap();
                ra.total_cmp(&rb)
            })
            .unwrap();
        assert_eq!(best, 4);
        let sol = greedy_trim(&p, 1).unwrap();
        assert_eq!(sol.outliers, OutlierSet::new(vec![4]).unwrap());
    }

    #[test]
    fn zero_k_rejects_nothing() {
        let p = LinearProblem::scalar(&[1.0, 5.0]).unwrap();
        let sol = greedy_trim(&p, 0).unwrap();
        assert!(sol.outliers.is_empty());
        assert_eq!(sol.estimate[0], 3.0);
    }

    #[test]
    fn never_beats_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(-1.0..1.0), 1.0]).collect();
            let ys: Vec<f64> = (0..10).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p = LinearProblem::from_rows(&rows, &ys).unwrap();
            let sol = greedy_trim(&p, 3).unwrap();
            let r = evaluate(&p, &sol.outliers).unwrap().total;
            assert!(r >= brute_force_rstar_k(&p, 3).unwrap());
        }
    }

    #[test]
    fn nested_outputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ys: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
        let p = LinearProblem::scalar(&ys).unwrap();
        let mut prev = OutlierSet::empty();
        for k in 1..=5 {
            let cur = greedy_trim(&p, k).unwrap().outliers;
            assert!(prev.is_subset(&cur));
            assert_eq!(cur.len(), k);
            prev = cur;
        }
    }

    #[test]
    fn too_many_rejections() {
        let p = LinearProblem::scalar(&[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(greedy_trim(&p, 3), Err(Error::TooFewInliers { .. })));
    }

    #[test]
    fn auto_k_stops_at_budget() {
        let p = LinearProblem::scalar(&[1.0, 1.01, 0.99, 40.0, 1.0, -30.0]).unwrap();
        let sol = greedy_until_bound(&p, &OutlierFreeBound::new(1e-3).unwrap()).unwrap();
        assert_eq!(sol.outliers, OutlierSet::new(vec![3, 5]).unwrap());
    }
}
