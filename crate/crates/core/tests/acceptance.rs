//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per criterion
//! with the measured values and exits nonzero if any criterion fails.

use std::sync::OnceLock;

use itertools::Itertools;
use mts_core::adapt::{adapt_run, AdaptConfig, Termination};
use mts_core::baselines::{brute_force_mts, brute_force_rstar_k, greedy_trim, OracleConfig};
use mts_core::bounds::{bound_report, BoundOptions};
use mts_core::datagen::{
    chi2_quantile, gen_linear, gen_registration, random_rotation, LinearScenario, RegistrationScenario,
};
use mts_core::harness::{run_sweep, trial_seed, SweepSpec};
use mts_core::metrics::{rotation_error, translation_error, TrialRecord};
use mts_core::problem::{total_residual, MtsProblem, OutlierFreeBound, OutlierSet};
use mts_core::solvers::{horn_fit, LinearProblem, Point3, RegistrationProblem};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ROTATION_TOL: f64 = 0.01;
const TRANSLATION_TOL_FRAC: f64 = 0.01;
const HIGH_FRACTIONS: [f64; 2] = [0.8, 0.9];
const MIN_WINS: usize = 9;
const CHI_TOL: f64 = 1e-3;
const HORN_TOL: f64 = 1e-9;

fn report(criterion: u32, ok: bool, detail: impl AsRef<str>) -> bool {
    println!(
        "{} criterion {criterion}: {}",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    ok
}

/// One registration instance of the robustness sweep with its ADAPT run.
struct Instance {
    fraction: f64,
    trial: usize,
    diameter: f64,
    m: usize,
    v: usize,
    adapt_calls: usize,
    termination: Termination,
}

struct Sweep {
    records: Vec<TrialRecord>,
    instances: Vec<Instance>,
}

fn registration_spec() -> SweepSpec {
    SweepSpec::registration()
}

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let spec = registration_spec();
        let records = run_sweep(&spec).expect("registration sweep");
        let mut instances = Vec::new();
        for &fraction in &spec.fractions {
            for trial in 0..spec.trials {
                let reg = &spec.registration;
                let mut sc = RegistrationScenario::new(
                    reg.n_points,
                    fraction,
                    reg.noise_sigma_frac,
                    trial_seed(spec.base_seed, trial),
                );
                sc.max_translation_frac = reg.max_translation_frac;
                let (problem, truth) = gen_registration(&sc).unwrap();
                let run = adapt_run(&problem, &spec.adapt).unwrap();
                instances.push(Instance {
                    fraction,
                    trial,
                    diameter: truth.diameter,
                    m: problem.measurement_count(),
                    v: problem.min_measurements(),
                    adapt_calls: run.solver_calls,
                    termination: run.termination,
                });
            }
        }
        Sweep { records, instances }
    })
}

fn rows(method: &str, fraction: f64) -> impl Iterator<Item = &TrialRecord> {
    sweep()
        .records
        .iter()
        .filter(move |r| r.method == method && (r.outlier_fraction - fraction).abs() < 1e-12)
}

fn diameter(fraction: f64, trial: usize) -> f64 {
    sweep()
        .instances
        .iter()
        .find(|i| (i.fraction - fraction).abs() < 1e-12 && i.trial == trial)
        .expect("instance")
        .diameter
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criterion_1_adapt_robust_up_to_ninety_percent() -> bool {
    let spec = registration_spec();
    let mut worst = (0.0f64, 0.0f64);
    let mut failing = Vec::new();
    for &f in &spec.fractions {
        let rot = mean(rows("adapt", f).map(|r| r.rotation_error.unwrap()));
        let trans = mean(rows("adapt", f).map(|r| r.translation_error.unwrap() / diameter(f, r.trial)));
        worst = (worst.0.max(rot), worst.1.max(trans));
        if !(rot < ROTATION_TOL && trans < TRANSLATION_TOL_FRAC) {
            failing.push(format!("{f:.1} (rot {rot:.3e}, trans/diam {trans:.3e})"));
        }
    }
    let ok = failing.is_empty();
    report(
        1,
        ok,
        format!(
            "worst mean rotation {:.3e} rad (< {ROTATION_TOL}), worst mean translation {:.3e} of diameter (< {TRANSLATION_TOL_FRAC}){}",
            worst.0,
            worst.1,
            if ok { String::new() } else { format!("; failing fractions: {}", failing.join(", ")) }
        ),
    )
}

fn criterion_2_adapt_beats_ransac_at_high_outlier_rates() -> bool {
    let mut details = Vec::new();
    let mut ok = true;
    for f in HIGH_FRACTIONS {
        let ransac: Vec<&TrialRecord> = rows("ransac", f).collect();
        let wins = rows("adapt", f)
            .filter(|a| {
                let r = ransac.iter().find(|r| r.trial == a.trial).expect("paired trial");
                a.rotation_error < r.rotation_error && a.translation_error < r.translation_error
            })
            .count();
        ok &= wins >= MIN_WINS;
        details.push(format!("{wins}/{} at {f:.1}", ransac.len()));
    }
    report(
        2,
        ok,
        format!(
            "ADAPT strictly lower rotation and translation error in {} (need >= {MIN_WINS})",
            details.join(", ")
        ),
    )
}

fn criterion_3_chi_stays_small() -> bool {
    let spec = registration_spec();
    let means: Vec<(f64, f64)> = spec
        .fractions
        .iter()
        .map(|&f| (f, mean(rows("adapt", f).map(|r| r.chi.as_f64()))))
        .collect();
    let ok = means.iter().all(|&(_, c)| c <= CHI_TOL);
    let listing = means.iter().map(|(f, c)| format!("{f:.1}:{c:.2e}")).join(" ");
    report(3, ok, format!("mean chi per fraction (<= {CHI_TOL}): {listing}"))
}

struct LinearCase {
    problem: LinearProblem,
    planted: usize,
}

fn linear_cases() -> Vec<LinearCase> {
    let mut out = Vec::new();
    for planted in 1..=4 {
        for trial in 0..25u64 {
            let m = 8 + (trial as usize % 5);
            let sc = LinearScenario {
                n: 2,
                m,
                outlier_fraction: 0.0,
                inlier_noise_sigma: 0.1,
                outlier_magnitude_range: (1.0, 10.0),
                seed: 1000 * planted as u64 + trial,
            }
            .with_outlier_count(planted);
            out.push(LinearCase {
                problem: gen_linear(&sc).unwrap().0,
                planted,
            });
        }
    }
    out
}

fn linear_adapt_config() -> AdaptConfig {
    SweepSpec::bound_experiment().adapt
}

fn criterion_4_certificate_dominates_true_ratio() -> bool {
    let cases = linear_cases();
    let cfg = linear_adapt_config();
    let (mut checked, mut violations, mut chain) = (0, 0, 0);
    let mut max_ratio_over_chi: f64 = 0.0;
    for case in &cases {
        let p = &case.problem;
        let greedy = greedy_trim(p, case.planted).unwrap().outliers;
        let adapt = adapt_run(p, &cfg).unwrap().outliers;
        for outliers in [greedy, adapt] {
            let rep = bound_report(p, &outliers, &BoundOptions::default()).unwrap();
            let r_star_k = brute_force_rstar_k(p, outliers.len()).unwrap();
            let ratio = if outliers.is_empty() {
                0.0
            } else {
                (rep.r_outliers - r_star_k) / (rep.r_empty - r_star_k)
            };
            checked += 1;
            if !rep.chi.dominates(ratio) {
                violations += 1;
            }
            if r_star_k > rep.r_outliers {
                chain += 1;
            }
            if let Some(c) = rep.chi.value().filter(|&c| c > 0.0) {
                max_ratio_over_chi = max_ratio_over_chi.max(ratio / c);
            }
        }
    }
    let ok = cases.len() >= 100 && violations == 0 && chain == 0;
    report(
        4,
        ok,
        format!(
            "{} instances, {checked} rejections: {violations} ratio > chi, {chain} with r*_k > r(O); max ratio/chi {max_ratio_over_chi:.3}",
            cases.len()
        ),
    )
}

fn criterion_5_horn_exact_on_noiseless_data() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_rot, mut worst_trans, mut improper) = (0.0f64, 0.0f64, 0);
    for _ in 0..1000 {
        let rotation = random_rotation(&mut rng);
        let translation = Vector3::from_fn(|_, _| rng.random_range(-10.0..10.0));
        let source: Vec<Point3> = (0..10)
            .map(|_| Point3::from(Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0))))
            .collect();
        let target: Vec<Point3> = source.iter().map(|p| rotation * p + translation).collect();
        let problem = RegistrationProblem::new(source, target).unwrap();
        let est = horn_fit(&problem, &(0..10).collect::<Vec<_>>()).unwrap();
        worst_rot = worst_rot.max(rotation_error(&est.rotation, &rotation));
        worst_trans = worst_trans.max(translation_error(&est.translation, &translation));
        if (est.rotation.determinant() - 1.0).abs() > 1e-9 {
            improper += 1;
        }
    }
    let ok = worst_rot <= HORN_TOL && worst_trans <= HORN_TOL && improper == 0;
    report(
        5,
        ok,
        format!("1000 instances: worst rotation {worst_rot:.2e} rad, worst translation {worst_trans:.2e}, {improper} improper"),
    )
}

fn criterion_6_adapt_solver_call_budget() -> bool {
    let mut worst_slack = i64::MAX;
    let (mut checked, mut capped, mut over) = (0, 0, 0);
    let mut check = |calls: usize, m: usize, v: usize, term: Termination| {
        if term == Termination::CallCapReached {
            capped += 1;
            return;
        }
        checked += 1;
        let limit = m - v + 1;
        if calls > limit {
            over += 1;
        }
        worst_slack = worst_slack.min(limit as i64 - calls as i64);
    };
    for i in &sweep().instances {
        check(i.adapt_calls, i.m, i.v, i.termination);
    }
    let cfg = linear_adapt_config();
    for case in linear_cases() {
        let p = &case.problem;
        let run = adapt_run(p, &cfg).unwrap();
        check(
            run.solver_calls,
            p.measurement_count(),
            p.min_measurements(),
            run.termination,
        );
    }
    let ok = over == 0 && checked > 0;
    report(
        6,
        ok,
        format!("{checked} runs checked, {over} over |M|-v+1, {capped} hit the call cap; smallest slack {worst_slack}"),
    )
}

fn criterion_7_oracle_returns_minimum_cardinality() -> bool {
    let mut failures = Vec::new();
    let mut sizes = Vec::new();
    for seed in 0..50u64 {
        let sigma = 0.1;
        let sc = LinearScenario {
            n: 2,
            m: 6 + (seed as usize % 5),
            outlier_fraction: 0.0,
            inlier_noise_sigma: sigma,
            outlier_magnitude_range: (1.0, 10.0),
            seed: 7000 + seed,
        }
        .with_outlier_count(seed as usize % 4);
        let (p, _) = gen_linear(&sc).unwrap();
        let bound = OutlierFreeBound::new(chi2_quantile(0.99, 1) * sigma * sigma).unwrap();
        let sol = brute_force_mts(&p, &OracleConfig::with_bound(bound)).unwrap();
        let m = p.measurement_count();
        let passes = |o: &OutlierSet| total_residual(&p, o).is_ok_and(|r| bound.admits(r, m - o.len()));
        let mut ok = passes(&sol.outliers);
        for k in 0..sol.outliers.len() {
            ok &= !(0..m).combinations(k).any(|c| passes(&OutlierSet::new(c).unwrap()));
        }
        if !ok {
            failures.push(seed);
        }
        sizes.push(sol.outliers.len());
    }
    let ok = failures.is_empty();
    report(
        7,
        ok,
        format!(
            "50 instances, |O*| in {}..={}, {} not minimal or over budget",
            sizes.iter().min().unwrap(),
            sizes.iter().max().unwrap(),
            failures.len()
        ),
    )
}

fn main() {
    let criteria: [fn() -> bool; 7] = [
        criterion_1_adapt_robust_up_to_ninety_percent,
        criterion_2_adapt_beats_ransac_at_high_outlier_rates,
        criterion_3_chi_stays_small,
        criterion_4_certificate_dominates_true_ratio,
        criterion_5_horn_exact_on_noiseless_data,
        criterion_6_adapt_solver_call_budget,
        criterion_7_oracle_returns_minimum_cardinality,
    ];
    let passed = criteria.iter().filter(|c| c()).count();
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() {
        std::process::exit(1);
    }
}
