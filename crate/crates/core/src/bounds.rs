//! A-posteriori sub-optimality certificate for a rejection `O`.
//!
//! For any rejection `O` with `r(O) < r(empty)`,
//!
//! ```text
//! (r(O) - r*_{|O|}) / (r(empty) - r*_{|O|})  <=  chi_O = r(O) / (r(empty) - r(O))
//! ```
//!
//! where `r*_k` is the best residual over rejections of at most `k`
//! measurements. When additionally `|O| >= |O*|` for an MTS optimum `O*`,
//! the same holds with `r* = r(O*)` in place of `r*_{|O|}`. `chi_O` only needs
//! two solver calls; the exact comparison quantities need exhaustive search
//! and are only available for small instances.

use std::fmt;

use crate::baselines::{brute_force_mts, rstar_profile, OracleConfig};
use crate::error::{Error, Result};
use crate::problem::{evaluate, MtsProblem, OutlierFreeBound, OutlierSet};

/// Relative slack under which `r(O) > r(empty)` is attributed to rounding
/// and treated as equality.
const ROUNDING_SLACK: f64 = 1e-12;

/// Value of `chi_O`; `Unbounded` when rejecting `O` bought no residual
/// reduction although `r(O) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiBound {
    Finite(f64),
    Unbounded,
}

impl ChiBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ChiBound::Finite(v) => Some(v),
            ChiBound::Unbounded => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ChiBound::Finite(_))
    }

    /// Whether `ratio <= chi`.
    pub fn dominates(&self, ratio: f64) -> bool {
        match *self {
            ChiBound::Finite(v) => ratio <= v,
            ChiBound::Unbounded => true,
        }
    }
}

impl fmt::Display for ChiBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiBound::Finite(v) => write!(f, "{v}"),
            ChiBound::Unbounded => f.write_str("inf"),
        }
    }
}

/// `chi = r_O / (r_empty - r_O)`.
pub fn chi_bound(r_empty: f64, r_outliers: f64) -> Result<ChiBound> {
    let invalid = || Error::InvalidResiduals { r_empty, r_outliers };
    if !(r_empty >= 0.0 && r_outliers >= 0.0) || !r_empty.is_finite() || !r_outliers.is_finite() {
        return Err(invalid());
    }
    if r_outliers == 0.0 {
        return Ok(ChiBound::Finite(0.0));
    }
    if r_outliers > r_empty * (1.0 + ROUNDING_SLACK) {
        return Err(invalid());
    }
    if r_outliers >= r_empty {
        return Ok(ChiBound::Unbounded);
    }
    Ok(ChiBound::Finite(r_outliers / (r_empty - r_outliers)))
}

/// Normalized gap `(r_O - best) / (r_empty - best)`; zero when the numerator
/// vanishes (including the `0 / 0` case where all three coincide).
pub fn suboptimality_ratio(r_empty: f64, r_outliers: f64, best: f64) -> f64 {
    let num = r_outliers - best;
    if num <= 0.0 {
        return 0.0;
    }
    num / (r_empty - best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Compute `r*_{|O|}` (and `r*` if `outlier_free` is set) by exhaustive search.
    pub exact: bool,
    pub outlier_free: Option<OutlierFreeBound>,
    pub exhaustive_cap: usize,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            exact: false,
            outlier_free: None,
            exhaustive_cap: OracleConfig::DEFAULT_CAP,
        }
    }
}

impl BoundOptions {
    pub fn exact() -> Self {
        Self {
            exact: true,
            ..Self::default()
        }
    }

    pub fn exact_with(bound: OutlierFreeBound) -> Self {
        Self {
            exact: true,
            outlier_free: Some(bound),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub r_empty: f64,
    pub r_outliers: f64,
    pub chi: ChiBound,
    pub cardinality: usize,
    /// `r*_{|O|}`.
    pub r_star_k: Option<f64>,
    /// `r* = r(O*)` for the MTS optimum under the supplied outlier-free bound.
    pub r_star: Option<f64>,
    /// `|O*|`.
    pub optimal_cardinality: Option<usize>,
    /// `(r(O) - r*_{|O|}) / (r(empty) - r*_{|O|})`.
    pub true_ratio: Option<f64>,
    /// `(r(O) - r*) / (r(empty) - r*)`, only when `|O| >= |O*|`.
    pub refined_ratio: Option<f64>,
}

pub fn bound_report<P: MtsProblem>(problem: &P, outliers: &OutlierSet, options: &BoundOptions) -> Result<BoundReport> {
    let m = problem.measurement_count();
    if options.exact && m > options.exhaustive_cap {
        return Err(Error::InstanceTooLarge {
            measurements: m,
            cap: options.exhaustive_cap,
        });
    }
    let r_outliers = evaluate(problem, outliers)?.total;
    let r_empty = evaluate(problem, &OutlierSet::empty())?.total;
    let chi = chi_bound(r_empty, r_outliers)?;
    let mut report = BoundReport {
        r_empty,
        r_outliers,
        chi,
        cardinality: outliers.len(),
        r_star_k: None,
        r_star: None,
        optimal_cardinality: None,
        true_ratio: None,
        refined_ratio: None,
    };
    if !options.exact {
        return Ok(report);
    }

    let profile = rstar_profile(problem, outliers.len(), options.exhaustive_cap)?;
    let r_star_k = profile[outliers.len()];
    report.r_star_k = Some(r_star_k);
    report.true_ratio = Some(suboptimality_ratio(r_empty, r_outliers, r_star_k));

    if let Some(bound) = options.outlier_free {
        let cfg = OracleConfig::new(bound, options.exhaustive_cap)?;
        let optimum = brute_force_mts(problem, &cfg)?;
        let r_star = evaluate(problem, &optimum.outliers)?.total;
        report.r_star = Some(r_star);
        report.optimal_cardinality = Some(optimum.outliers.len());
        if outliers.len() >= optimum.outliers.len() {
            report.refined_ratio = Some(suboptimality_ratio(r_empty, r_outliers, r_star));
        }
    }
    Ok(report)
}
