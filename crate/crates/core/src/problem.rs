//! The minimally trimmed squares (MTS) problem abstraction.
//!
//! A problem is a set of measurements `M = {0, .., m-1}` together with a
//! global solver that fits the unknown to any subset of them. Everything in
//! this crate (adaptive trimming, the certificates, the baselines) is generic
//! over [`MtsProblem`] and only ever talks to a problem through `fit` and
//! `residual`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result, SolverError};

/// Index of a measurement inside its owning problem.
pub type MeasurementIndex = usize;

/// An estimation problem with an exact global solver for outlier-free data.
///
/// Residuals are *squared* norms `||h_i(y_i, x)||^2`; every threshold in the
/// crate lives in the same squared units.
pub trait MtsProblem {
    type Estimate: Clone + fmt::Debug;

    /// Number of measurements `|M|`.
    fn measurement_count(&self) -> usize;

    /// Minimum number of measurements the global solver needs.
    fn min_measurements(&self) -> usize;

    /// Solves the least-squares problem restricted to `inliers`.
    ///
    /// `inliers` is sorted ascending and free of duplicates. Implementations
    /// must be deterministic.
    fn fit(&self, inliers: &[MeasurementIndex]) -> std::result::Result<Self::Estimate, SolverError>;

    /// Squared residual of measurement `index` at `estimate`.
    fn residual(&self, index: MeasurementIndex, estimate: &Self::Estimate) -> f64;
}

impl<P: MtsProblem + ?Sized> MtsProblem for &P {
    type Estimate = P::Estimate;

    fn measurement_count(&self) -> usize {
        (**self).measurement_count()
    }

    fn min_measurements(&self) -> usize {
        (**self).min_measurements()
    }

    fn fit(&self, inliers: &[MeasurementIndex]) -> std::result::Result<Self::Estimate, SolverError> {
        (**self).fit(inliers)
    }

    fn residual(&self, index: MeasurementIndex, estimate: &Self::Estimate) -> f64 {
        (**self).residual(index, estimate)
    }
}

/// A set of rejected measurements. Stored sorted, so equality and hashing are
/// order independent.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutlierSet {
    indices: Vec<MeasurementIndex>,
}

impl OutlierSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from indices, rejecting duplicates.
    pub fn new(mut indices: Vec<MeasurementIndex>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex { index: w[0] });
        }
        Ok(Self { indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: MeasurementIndex) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Inserts `index`; returns `false` if it was already present.
    pub fn insert(&mut self, index: MeasurementIndex) -> bool {
        match self.indices.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, index);
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = MeasurementIndex> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[MeasurementIndex] {
        &self.indices
    }

    pub fn is_subset(&self, other: &OutlierSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn intersection_len(&self, other: &OutlierSet) -> usize {
        self.iter().filter(|&i| other.contains(i)).count()
    }

    /// Checks every index against a problem with `measurement_count` measurements.
    pub fn validate(&self, measurement_count: usize) -> Result<()> {
        match self.indices.last() {
            Some(&last) if last >= measurement_count => Err(Error::IndexOutOfRange {
                index: last,
                count: measurement_count,
            }),
            _ => Ok(()),
        }
    }

    /// The inliers `M \ O`, ascending.
    pub fn complement(&self, measurement_count: usize) -> Vec<MeasurementIndex> {
        let mut out = Vec::with_capacity(measurement_count.saturating_sub(self.len()));
        let mut rejected = self.indices.iter().peekable();
        for i in 0..measurement_count {
            if rejected.peek() == Some(&&i) {
                rejected.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}

impl FromIterator<MeasurementIndex> for OutlierSet {
    /// Collects with set semantics: repeated indices collapse.
    fn from_iter<I: IntoIterator<Item = MeasurementIndex>>(iter: I) -> Self {
        let mut indices: Vec<_> = iter.into_iter().collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }
}

impl fmt::Debug for OutlierSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices.iter()).finish()
    }
}

/// Per-measurement outlier-free budget `eps`; a rejection `O` is admissible
/// when `r(O) <= |M \ O| * eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutlierFreeBound {
    per_measurement_eps: f64,
}

impl OutlierFreeBound {
    pub fn new(per_measurement_eps: f64) -> Result<Self> {
        if per_measurement_eps.is_nan() || per_measurement_eps < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "outlier-free bound must be non-negative, got {per_measurement_eps}"
            )));
        }
        Ok(Self { per_measurement_eps })
    }

    /// `eps = sigma^2 * F^{-1}_{chi2(dof)}(p)`: the budget for squared
    /// residuals of `dof`-dimensional Gaussian noise with per-axis `sigma`.
    pub fn from_chi2(probability: f64, dof: u32, sigma: f64) -> Result<Self> {
        Self::new(crate::datagen::chi2_quantile(probability, dof) * sigma * sigma)
    }

    pub fn per_measurement(&self) -> f64 {
        self.per_measurement_eps
    }

    pub fn budget(&self, inlier_count: usize) -> f64 {
        inlier_count as f64 * self.per_measurement_eps
    }

    pub fn admits(&self, total_residual: f64, inlier_count: usize) -> bool {
        total_residual <= self.budget(inlier_count)
    }
}

/// The fit of `M \ O` and the residuals of every measurement at that fit.
#[derive(Debug, Clone)]
pub struct Evaluation<E> {
    pub estimate: E,
    /// `r_i(O)` for all `i` in `M`, including the rejected ones.
    pub residuals: Vec<f64>,
    /// `r(O)`: sum of `residuals` over `M \ O`.
    pub total: f64,
}

/// Fits `M \ O` and evaluates all residuals, without caching.
pub fn evaluate<P: MtsProblem>(problem: &P, outliers: &OutlierSet) -> Result<Evaluation<P::Estimate>> {
    let m = problem.measurement_count();
    outliers.validate(m)?;
    let inliers = outliers.complement(m);
    let required = problem.min_measurements();
    if inliers.len() < required {
        return Err(Error::TooFewInliers {
            inliers: inliers.len(),
            required,
        });
    }
    let estimate = problem.fit(&inliers)?;
    let mut residuals = Vec::with_capacity(m);
    for i in 0..m {
        let r = problem.residual(i, &estimate);
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::NonFiniteResidual { index: i, value: r });
        }
        residuals.push(r);
    }
    let total = inliers.iter().map(|&i| residuals[i]).sum();
    Ok(Evaluation {
        estimate,
        residuals,
        total,
    })
}

/// `r(O)`: the minimal residual of the inliers `M \ O`.
pub fn total_residual<P: MtsProblem>(problem: &P, outliers: &OutlierSet) -> Result<f64> {
    Ok(evaluate(problem, outliers)?.total)
}

/// `r_i(O)` for every measurement, rejected ones included.
pub fn residual_vector<P: MtsProblem>(problem: &P, outliers: &OutlierSet) -> Result<Vec<f64>> {
    Ok(evaluate(problem, outliers)?.residuals)
}

/// Default number of evaluations an [`Evaluator`] keeps.
pub const DEFAULT_CACHE_CAPACITY: usize = 256;

/// Memoizing front end to a problem, keyed by the canonical outlier set.
///
/// Owned by a single run; counts how many times the global solver was
/// actually invoked.
pub struct Evaluator<'p, P: MtsProblem> {
    problem: &'p P,
    cache: HashMap<OutlierSet, Arc<Evaluation<P::Estimate>>>,
    insertion_order: VecDeque<OutlierSet>,
    capacity: usize,
    solver_calls: usize,
}

impl<'p, P: MtsProblem> Evaluator<'p, P> {
    pub fn new(problem: &'p P) -> Self {
        Self::with_capacity(problem, DEFAULT_CACHE_CAPACITY)
    }

    pub fn with_capacity(problem: &'p P, capacity: usize) -> Self {
        Self {
            problem,
            cache: HashMap::new(),
            insertion_order: VecDeque::new(),
            capacity: capacity.max(1),
            solver_calls: 0,
        }
    }

    pub fn problem(&self) -> &'p P {
        self.problem
    }

    /// Number of global-solver invocations so far (cache misses).
    pub fn solver_calls(&self) -> usize {
        self.solver_calls
    }

    pub fn is_cached(&self, outliers: &OutlierSet) -> bool {
        self.cache.contains_key(outliers)
    }

    pub fn evaluate(&mut self, outliers: &OutlierSet) -> Result<Arc<Evaluation<P::Estimate>>> {
        if let Some(hit) = self.cache.get(outliers) {
            return Ok(Arc::clone(hit));
        }
        self.solver_calls += 1;
        let eval = Arc::new(evaluate(self.problem, outliers)?);
        if self.cache.len() >= self.capacity {
            if let Some(oldest) = self.insertion_order.pop_front() {
                self.cache.remove(&oldest);
            }
        }
        self.insertion_order.push_back(outliers.clone());
        self.cache.insert(outliers.clone(), Arc::clone(&eval));
        Ok(eval)
    }

    pub fn total_residual(&mut self, outliers: &OutlierSet) -> Result<f64> {
        Ok(self.evaluate(outliers)?.total)
    }
}
