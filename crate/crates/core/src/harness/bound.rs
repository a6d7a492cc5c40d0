use std::io::Write;

use rayon::prelude::*;

use crate::bounds::{bound_report, BoundOptions, ChiBound};
use crate::datagen::{chi2_quantile, gen_linear, LinearScenario};
use crate::error::Error;
use crate::harness::sweep::{run_method, trial_seed};
use crate::harness::{HarnessError, ProblemKind, SweepSpec};
use crate::problem::OutlierFreeBound;

/// Largest instance the bound experiment accepts.
pub const BOUND_EXPERIMENT_CAP: usize = 12;

pub const BOUND_CSV_HEADER: [&str; 12] = [
    "method",
    "planted",
    "trial",
    "seed",
    "cardinality",
    "r_empty",
    "r_outliers",
    "r_star_k",
    "ratio_k",
    "chi",
    "r_star",
    "ratio_star",
];

/// Certificate against exact optimum for one method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub method: String,
    pub planted: usize,
    pub trial: usize,
    pub seed: u64,
    /// `|O|` of the method's rejection.
    pub cardinality: usize,
    pub r_empty: f64,
    pub r_outliers: f64,
    /// `r*_{|O|}` by exhaustive search.
    pub r_star_k: f64,
    /// `(r(O) - r*_{|O|}) / (r(empty) - r*_{|O|})`.
    pub ratio_k: f64,
    pub chi: ChiBound,
    /// `r(O*)` when the exhaustive MTS search is feasible.
    pub r_star: Option<f64>,
    /// `(r(O) - r*) / (r(empty) - r*)` when `|O| >= |O*|`.
    pub ratio_star: Option<f64>,
}

/// For every planted count and trial, runs the spec's methods on a linear
/// instance and compares each rejection with the exhaustive optimum. Every
/// row is checked against its certificate before it is returned.
pub fn run_bound_experiment(spec: &SweepSpec) -> Result<Vec<BoundRow>, HarnessError> {
    if spec.kind != ProblemKind::Linear {
        return Err(HarnessError::config(
            "kind",
            "the bound experiment runs on linear problems",
        ));
    }
    spec.validate()?;
    let m = spec.linear.m;
    if m > BOUND_EXPERIMENT_CAP {
        return Err(Error::InstanceTooLarge {
            measurements: m,
            cap: BOUND_EXPERIMENT_CAP,
        }
        .into());
    }
    if spec.planted_counts.is_empty() {
        return Err(HarnessError::config(
            "planted",
            "at least one planted count is required",
        ));
    }
    if let Some(&k) = spec.planted_counts.iter().find(|&&k| k + spec.linear.n > m) {
        return Err(HarnessError::config(
            "planted",
            format!("{k} outliers leave fewer than n inliers"),
        ));
    }

    let jobs: Vec<(usize, usize)> = spec
        .planted_counts
        .iter()
        .flat_map(|&k| (0..spec.trials).map(move |t| (k, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, trial)| bound_instance(spec, k, trial))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<BoundRow> = rows.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.planted.cmp(&b.planted))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(rows)
}

fn bound_instance(spec: &SweepSpec, planted: usize, trial: usize) -> Result<Vec<BoundRow>, HarnessError> {
    let seed = trial_seed(spec.base_seed, trial);
    let lin = &spec.linear;
    let scenario = LinearScenario {
        n: lin.n,
        m: lin.m,
        outlier_fraction: 0.0,
        inlier_noise_sigma: lin.noise_sigma,
        outlier_magnitude_range: lin.outlier_magnitude_range,
        seed,
    }
    .with_outlier_count(planted);
    let (problem, _) = gen_linear(&scenario)?;
    let eps = chi2_quantile(spec.threshold_probability, 1) * lin.noise_sigma * lin.noise_sigma;
    let budget = OutlierFreeBound::new(eps)?;

    let mut rows = Vec::new();
    for &method in &spec.methods {
        let (outliers, _, _) =
            run_method(spec, method, &problem, planted, eps, seed).map_err(|source| HarnessError::Method {
                method: method.name(),
                fraction: planted as f64 / lin.m as f64,
                trial,
                source,
            })?;
        let report = match bound_report(&problem, &outliers, &BoundOptions::exact_with(budget)) {
            Err(Error::Infeasible { .. }) => bound_report(&problem, &outliers, &BoundOptions::exact())?,
            other => other?,
        };
        let row = BoundRow {
            method: method.name().to_string(),
            planted,
            trial,
            seed,
            cardinality: report.cardinality,
            r_empty: report.r_empty,
            r_outliers: report.r_outliers,
            r_star_k: report.r_star_k.expect("exact report"),
            ratio_k: report.true_ratio.expect("exact report"),
            chi: report.chi,
            r_star: report.r_star,
            ratio_star: report.refined_ratio,
        };
        check_row(&row)?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_row(row: &BoundRow) -> Result<(), HarnessError> {
    let violated = |ratio: f64| HarnessError::BoundViolated {
        method: row.method.clone(),
        planted: row.planted,
        trial: row.trial,
        ratio,
        chi: row.chi.as_f64(),
    };
    if !row.chi.dominates(row.ratio_k) || row.r_star_k > row.r_outliers {
        return Err(violated(row.ratio_k));
    }
    if let Some(r) = row.ratio_star.filter(|&r| !row.chi.dominates(r)) {
        return Err(violated(r));
    }
    Ok(())
}

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], writer: W) -> Result<(), HarnessError> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BOUND_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.planted.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.cardinality.to_string(),
            r.r_empty.to_string(),
            r.r_outliers.to_string(),
            r.r_star_k.to_string(),
            r.ratio_k.to_string(),
            r.chi.to_string(),
            opt(r.r_star),
            opt(r.ratio_star),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Io {
        path: "<csv>".into(),
        source: e,
    })?;
    Ok(())
}
