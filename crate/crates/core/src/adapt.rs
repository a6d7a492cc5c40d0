//! Adaptive trimming (ADAPT).
//!
//! Starting from the full measurement set, each outer iteration rejects the
//! measurements that are both among the `g` largest residuals of the current
//! fit and above an outlier threshold `tau`. When that leaves the rejection
//! unchanged (or empty) the threshold is discounted by `gamma` and the
//! selection is retried. The group size `g` grows by `g_step` per iteration.
//! The run ends once only `v` measurements remain or the total residual has
//! changed by at most `delta` for `t_conv` consecutive iterations.
//!
//! Selection is always over *all* measurements, so a previously rejected
//! measurement whose residual dropped is readmitted.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{Evaluation, Evaluator, MeasurementIndex, MtsProblem, OutlierSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Overrides the problem's minimum measurement count `v` (never below it).
    pub min_measurements: Option<usize>,
    /// Threshold discount factor, in `(0, 1)`.
    pub gamma: f64,
    /// Convergence threshold on `|r(O_t) - r(O_{t-1})|`, squared residual units.
    pub delta: f64,
    /// Consecutive converged iterations required to stop.
    pub t_conv: usize,
    /// Growth of the group size per iteration (the initial group size too).
    pub g_step: usize,
    /// Safety cap on global-solver calls; `None` means `4 |M|`.
    pub max_solver_calls: Option<usize>,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            min_measurements: None,
            gamma: 0.99,
            delta: 1e-4,
            t_conv: 2,
            g_step: 1,
            max_solver_calls: None,
        }
    }
}

impl AdaptConfig {
    pub fn new(delta: f64, g_step: usize) -> Self {
        Self {
            delta,
            g_step,
            ..Self::default()
        }
    }

    /// Tuning used for the 453-point registration benchmark.
    pub fn bunny() -> Self {
        Self::new(1e-4, 10)
    }

    /// Tuning used for the 3617-point registration benchmark.
    pub fn eth() -> Self {
        Self::new(1e-2, 10)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive");
        }
        if self.t_conv == 0 {
            return bad("t_conv must be at least 1");
        }
        if self.g_step == 0 {
            return bad("g_step must be at least 1");
        }
        if self.min_measurements == Some(0) {
            return bad("min_measurements must be at least 1");
        }
        if self.max_solver_calls == Some(0) {
            return bad("max_solver_calls must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MinMeasurements,
    Converged,
    CallCapReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    /// The threshold was discounted inside the selection loop.
    Discount,
    /// An outer iteration committed a new rejection.
    Update,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub kind: StepKind,
    pub outliers: OutlierSet,
    /// `r(O)` of the recorded rejection.
    pub residual: f64,
    pub tau: f64,
    pub group_size: usize,
}

#[derive(Debug, Clone)]
pub struct AdaptResult<E> {
    pub outliers: OutlierSet,
    pub estimate: E,
    /// `r(O)` of the returned rejection.
    pub residual: f64,
    pub trace: Vec<TraceRecord>,
    pub iterations: usize,
    /// Distinct global-solver invocations.
    pub solver_calls: usize,
    pub termination: Termination,
}

/// Indices of the `g` largest residuals, ties resolved toward lower indices.
pub fn largest_indices(residuals: &[f64], g: usize) -> Vec<MeasurementIndex> {
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| match residuals[b].total_cmp(&residuals[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order.truncate(g);
    order
}

struct CapReached;

/// Evaluator wrapper that refuses new solver calls past the cap.
struct Capped<'e, 'p, P: MtsProblem> {
    ev: &'e mut Evaluator<'p, P>,
    cap: usize,
}

impl<P: MtsProblem> Capped<'_, '_, P> {
    fn eval(&mut self, o: &OutlierSet) -> Result<std::result::Result<Arc<Evaluation<P::Estimate>>, CapReached>> {
        if !self.ev.is_cached(o) && self.ev.solver_calls() >= self.cap {
            return Ok(Err(CapReached));
        }
        self.ev.evaluate(o).map(Ok)
    }
}

pub fn adapt_run<P: MtsProblem>(problem: &P, config: &AdaptConfig) -> Result<AdaptResult<P::Estimate>> {
    config.validate()?;
    let m = problem.measurement_count();
    let solver_min = problem.min_measurements();
    let v = config.min_measurements.unwrap_or(solver_min);
    if v < solver_min {
        return Err(Error::InvalidConfig(format!(
            "min_measurements {v} is below the solver requirement {solver_min}"
        )));
    }
    if m < v {
        return Err(Error::ProblemTooSmall {
            measurements: m,
            required: v,
        });
    }
    let max_rejections = m - v;
    let cap = config.max_solver_calls.unwrap_or(4 * m).max(1);

    let mut ev = Evaluator::new(problem);
    let mut capped = Capped { ev: &mut ev, cap };
    let mut trace = Vec::new();

    let empty = OutlierSet::empty();
    let Ok(initial) = capped.eval(&empty)? else {
        unreachable!("cap is at least one call");
    };
    let mut tau = initial.residuals.iter().copied().fold(0.0, f64::max);
    let mut g = config.g_step;
    trace.push(TraceRecord {
        iteration: 0,
        kind: StepKind::Update,
        outliers: empty.clone(),
        residual: initial.total,
        tau,
        group_size: g,
    });

    let finish = |outliers: OutlierSet,
                  eval: &Evaluation<P::Estimate>,
                  trace: Vec<TraceRecord>,
                  iterations: usize,
                  solver_calls: usize,
                  termination: Termination| AdaptResult {
        outliers,
        estimate: eval.estimate.clone(),
        residual: eval.total,
        trace,
        iterations,
        solver_calls,
        termination,
    };

    if max_rejections == 0 {
        let calls = capped.ev.solver_calls();
        return Ok(finish(empty, &initial, trace, 0, calls, Termination::MinMeasurements));
    }
    // Noiseless data: nothing exceeds any threshold and discounting 0 never progresses.
    if tau == 0.0 {
        let calls = capped.ev.solver_calls();
        return Ok(finish(empty, &initial, trace, 0, calls, Termination::Converged));
    }

    let mut prev = empty;
    let mut prev_eval = initial;
    let mut converged_count = 0;
    let mut t = 0;
    loop {
        t += 1;
        let mut current = prev.clone();
        while current == prev {
            let selected = largest_indices(&prev_eval.residuals, g.min(max_rejections));
            current = selected
                .into_iter()
                .filter(|&i| prev_eval.residuals[i] >= tau)
                .collect();
            if current == prev || current.is_empty() {
                let Ok(cur_eval) = capped.eval(&current)? else {
                    let calls = capped.ev.solver_calls();
                    return Ok(finish(prev, &prev_eval, trace, t, calls, Termination::CallCapReached));
                };
                let worst_inlier = current
                    .complement(m)
                    .into_iter()
                    .map(|i| cur_eval.residuals[i])
                    .fold(0.0, f64::max);
                tau = config.gamma * tau.min(worst_inlier);
                trace.push(TraceRecord {
                    iteration: t,
                    kind: StepKind::Discount,
                    outliers: current.clone(),
                    residual: cur_eval.total,
                    tau,
                    group_size: g,
                });
            }
        }
        g += config.g_step;

        let Ok(cur_eval) = capped.eval(&current)? else {
            let calls = capped.ev.solver_calls();
            return Ok(finish(prev, &prev_eval, trace, t, calls, Termination::CallCapReached));
        };
        trace.push(TraceRecord {
            iteration: t,
            kind: StepKind::Update,
            outliers: current.clone(),
            residual: cur_eval.total,
            tau,
            group_size: g,
        });

        if current.len() == max_rejections {
            let calls = capped.ev.solver_calls();
            return Ok(finish(
                current,
                &cur_eval,
                trace,
                t,
                calls,
                Termination::MinMeasurements,
            ));
        }
        if (cur_eval.total - prev_eval.total).abs() <= config.delta {
            converged_count += 1;
            if converged_count == config.t_conv {
                let calls = capped.ev.solver_calls();
                return Ok(finish(current, &cur_eval, trace, t, calls, Termination::Converged));
            }
        } else {
            converged_count = 0;
        }
        prev = current;
        prev_eval = cur_eval;
    }
}
