use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::adapt::adapt_run;
use crate::baselines::{brute_force_mts, greedy_trim, ransac_run, OracleConfig, RansacConfig};
use crate::bounds::{chi_bound, ChiBound};
use crate::datagen::{chi2_quantile, gen_linear, gen_registration, load_ply, LinearScenario, RegistrationScenario};
use crate::harness::{HarnessError, Method, ProblemKind, SweepSpec};
use crate::metrics::{classification_rates, rotation_error, translation_error, TrialRecord};
use crate::problem::{total_residual, MtsProblem, OutlierFreeBound, OutlierSet};
use crate::solvers::{Point3, RigidTransform};

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "outlier_fraction",
    "trial",
    "seed",
    "rotation_error",
    "translation_error",
    "tpr",
    "fpr",
    "chi",
    "solver_calls",
    "wall_time",
];

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// Runs every method on every (fraction, trial) instance. Trials run in
/// parallel; the result is sorted by (method, fraction, trial).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<TrialRecord>, HarnessError> {
    spec.validate()?;
    let cloud = match (spec.kind, &spec.registration.cloud) {
        (ProblemKind::Registration, Some(path)) => Some(load_ply(path)?),
        _ => None,
    };
    let jobs: Vec<(f64, usize)> = spec
        .fractions
        .iter()
        .flat_map(|&f| (0..spec.trials).map(move |t| (f, t)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(fraction, trial)| run_instance(spec, cloud.as_deref(), fraction, trial))
        .collect::<Result<Vec<_>, _>>()?;
    let mut records: Vec<TrialRecord> = per_job.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.outlier_fraction.total_cmp(&b.outlier_fraction))
            .then(a.trial.cmp(&b.trial))
    });
}

fn run_instance(
    spec: &SweepSpec,
    cloud: Option<&[Point3]>,
    fraction: f64,
    trial: usize,
) -> Result<Vec<TrialRecord>, HarnessError> {
    let seed = trial_seed(spec.base_seed, trial);
    let ctx = Context {
        spec,
        fraction,
        trial,
        seed,
    };
    match spec.kind {
        ProblemKind::Registration => {
            let reg = &spec.registration;
            let mut scenario = RegistrationScenario::new(reg.n_points, fraction, reg.noise_sigma_frac, seed);
            scenario.max_translation_frac = reg.max_translation_frac;
            if let Some(c) = cloud {
                scenario = scenario.with_source(c.to_vec());
            }
            let (problem, truth) = gen_registration(&scenario)?;
            let truth_tf = truth.transform;
            ctx.run_methods(&problem, &truth.outliers, truth.noise_sigma, |est: &RigidTransform| {
                (
                    Some(rotation_error(&est.rotation, &truth_tf.rotation)),
                    Some(translation_error(&est.translation, &truth_tf.translation)),
                )
            })
        }
        ProblemKind::Linear => {
            let lin = &spec.linear;
            let scenario = LinearScenario {
                n: lin.n,
                m: lin.m,
                outlier_fraction: fraction,
                inlier_noise_sigma: lin.noise_sigma,
                outlier_magnitude_range: lin.outlier_magnitude_range,
                seed,
            };
            let (problem, truth) = gen_linear(&scenario)?;
            ctx.run_methods(&problem, &truth.outliers, truth.noise_sigma, |_| (None, None))
        }
    }
}

struct Context<'a> {
    spec: &'a SweepSpec,
    fraction: f64,
    trial: usize,
    seed: u64,
}

/// Declared outliers, estimate and solver calls of one method run.
pub(crate) type MethodOutput<E> = (OutlierSet, E, usize);

/// Runs `method` on `problem`. `planted` sets greedy's `k`; `eps` is the
/// per-measurement budget used by RANSAC and the oracle.
pub(crate) fn run_method<P: MtsProblem>(
    spec: &SweepSpec,
    method: Method,
    problem: &P,
    planted: usize,
    eps: f64,
    seed: u64,
) -> crate::Result<MethodOutput<P::Estimate>> {
    Ok(match method {
        Method::Adapt => {
            let r = adapt_run(problem, &spec.adapt)?;
            (r.outliers, r.estimate, r.solver_calls)
        }
        Method::Ransac => {
            let cfg = RansacConfig {
                max_iterations: spec.ransac_iterations,
                sample_size: None,
                inlier_threshold: eps,
                seed,
                refit: spec.ransac_refit,
            };
            let s = ransac_run(problem, &cfg)?;
            (s.outliers, s.estimate, s.solver_calls)
        }
        Method::Greedy => {
            let k = planted.min(problem.measurement_count() - problem.min_measurements());
            let s = greedy_trim(problem, k)?;
            (s.outliers, s.estimate, s.solver_calls)
        }
        Method::Oracle => {
            let cfg = OracleConfig::new(OutlierFreeBound::new(eps)?, OracleConfig::DEFAULT_CAP)?;
            let s = brute_force_mts(problem, &cfg)?;
            (s.outliers, s.estimate, s.solver_calls)
        }
    })
}

impl Context<'_> {
    fn run_methods<P, F>(
        &self,
        problem: &P,
        planted: &OutlierSet,
        noise_sigma: f64,
        errors: F,
    ) -> Result<Vec<TrialRecord>, HarnessError>
    where
        P: MtsProblem,
        F: Fn(&P::Estimate) -> (Option<f64>, Option<f64>),
    {
        let m = problem.measurement_count();
        let eps =
            chi2_quantile(self.spec.threshold_probability, self.spec.kind.residual_dof()) * noise_sigma * noise_sigma;
        let r_empty = total_residual(problem, &OutlierSet::empty())?;
        let mut out = Vec::with_capacity(self.spec.methods.len());
        for &method in &self.spec.methods {
            let start = Instant::now();
            let result = run_method(self.spec, method, problem, planted.len(), eps, self.seed);
            let wall_time = start.elapsed().as_secs_f64();
            let (outliers, estimate, solver_calls) = result.map_err(|source| HarnessError::Method {
                method: method.name(),
                fraction: self.fraction,
                trial: self.trial,
                source,
            })?;
            let chi = match total_residual(problem, &outliers) {
                Ok(r) => chi_bound(r_empty, r)?,
                Err(_) => ChiBound::Unbounded,
            };
            let (tpr, fpr) = classification_rates(&outliers, planted, m);
            let (rotation_error, translation_error) = errors(&estimate);
            out.push(TrialRecord {
                method: method.name().to_string(),
                outlier_fraction: self.fraction,
                trial: self.trial,
                seed: self.seed,
                rotation_error,
                translation_error,
                tpr,
                fpr,
                chi,
                solver_calls,
                wall_time,
            });
        }
        Ok(out)
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(records: &[TrialRecord], writer: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.method.clone(),
            r.outlier_fraction.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            opt(r.rotation_error),
            opt(r.translation_error),
            r.tpr.to_string(),
            r.fpr.to_string(),
            r.chi.to_string(),
            r.solver_calls.to_string(),
            r.wall_time.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std })
    }
}

/// Per (method, fraction) aggregate of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: String,
    pub outlier_fraction: f64,
    pub trials: usize,
    pub rotation_error: Option<Stat>,
    pub translation_error: Option<Stat>,
    pub tpr: Stat,
    pub fpr: Stat,
    /// Infinite mean when any trial's certificate is unbounded.
    pub chi: Stat,
    pub solver_calls: Stat,
    pub wall_time: Stat,
}

pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(String, u64), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.method.clone(), r.outlier_fraction.to_bits()))
            .or_default()
            .push(r);
    }
    let mut out: Vec<CellSummary> = cells
        .into_values()
        .map(|rows| {
            let col =
                |f: &dyn Fn(&TrialRecord) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap();
            let opt_col = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
                let v: Option<Vec<f64>> = rows.iter().map(|r| f(r)).collect();
                v.and_then(|v| Stat::of(&v))
            };
            CellSummary {
                method: rows[0].method.clone(),
                outlier_fraction: rows[0].outlier_fraction,
                trials: rows.len(),
                rotation_error: opt_col(&|r| r.rotation_error),
                translation_error: opt_col(&|r| r.translation_error),
                tpr: col(&|r| r.tpr),
                fpr: col(&|r| r.fpr),
                chi: col(&|r| r.chi.as_f64()),
                solver_calls: col(&|r| r.solver_calls as f64),
                wall_time: col(&|r| r.wall_time),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.method.cmp(&b.method).then(
            a.outlier_fraction
                .partial_cmp(&b.outlier_fraction)
                .unwrap_or(Ordering::Equal),
        )
    });
    out
}

/// Plain-text table of `mean ± std` per cell.
pub fn format_summary(cells: &[CellSummary]) -> String {
    let fmt = |s: Option<Stat>| match s {
        Some(s) if s.mean.is_infinite() => "inf".to_string(),
        Some(s) => format!("{:.2e} ± {:.1e}", s.mean, s.std),
        None => "-".to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<7} {:>5} {:>20} {:>20} {:>18} {:>18} {:>20} {:>18} {:>18}",
        "method", "frac", "rotation_error", "translation_error", "tpr", "fpr", "chi", "solver_calls", "wall_time"
    );
    for c in cells {
        let _ = writeln!(
            out,
            "{:<7} {:>5.2} {:>20} {:>20} {:>18} {:>18} {:>20} {:>18} {:>18}",
            c.method,
            c.outlier_fraction,
            fmt(c.rotation_error),
            fmt(c.translation_error),
            fmt(Some(c.tpr)),
            fmt(Some(c.fpr)),
            fmt(Some(c.chi)),
            fmt(Some(c.solver_calls)),
            fmt(Some(c.wall_time)),
        );
    }
    out
}
