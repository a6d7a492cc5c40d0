use std::ffi::CStr;
use std::ptr;

use mts_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mts_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn scalar_problem(ys: &[f64]) -> *mut MtsLinearProblem {
    let design = vec![1.0; ys.len()];
    let mut p = ptr::null_mut();
    let status = unsafe { mts_linear_problem_new(design.as_ptr(), ys.as_ptr(), ys.len(), 1, &mut p) };
    assert_eq!(status, MtsStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn linear_adapt_round_trip() {
    let ys = [1.0, 1.02, 0.97, 1.01, 40.0, 0.99];
    let p = scalar_problem(&ys);
    let mut cfg = MtsAdaptConfig {
        gamma: 0.0,
        delta: 0.0,
        t_conv: 0,
        g_step: 0,
        min_measurements: 7,
        max_solver_calls: 7,
    };
    assert_eq!(unsafe { mts_adapt_config_default(&mut cfg) }, MtsStatus::Ok);
    assert_eq!((cfg.gamma, cfg.t_conv, cfg.min_measurements), (0.99, 2, 0));
    cfg.delta = 1e-2;

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { mts_linear_adapt(p, &cfg, &mut res) }, MtsStatus::Ok);
    let count = unsafe { mts_adapt_result_outliers(res, ptr::null_mut(), 0) };
    let mut idx = vec![0usize; count];
    assert_eq!(
        unsafe { mts_adapt_result_outliers(res, idx.as_mut_ptr(), idx.len()) },
        count
    );
    assert!(idx.contains(&4));
    assert!(idx.windows(2).all(|w| w[0] < w[1]));

    let mut x = [0.0; 4];
    assert_eq!(unsafe { mts_adapt_result_estimate(res, x.as_mut_ptr(), 4) }, 1);
    assert!((x[0] - 1.0).abs() < 0.05);
    let mut term = MtsTermination::CallCapReached;
    assert_eq!(unsafe { mts_adapt_result_termination(res, &mut term) }, MtsStatus::Ok);
    assert_eq!(term, MtsTermination::Converged);
    assert!(unsafe { mts_adapt_result_solver_calls(res) } >= 1);
    assert!(unsafe { mts_adapt_result_iterations(res) } >= 1);

    let mut chi = f64::NAN;
    assert_eq!(
        unsafe { mts_linear_chi(p, idx.as_ptr(), idx.len(), &mut chi) },
        MtsStatus::Ok
    );
    let r_o = unsafe { mts_adapt_result_residual(res) };
    assert!((0.0..1e-3).contains(&chi), "chi {chi}, r {r_o}");

    unsafe {
        mts_adapt_result_free(res);
        mts_linear_problem_free(p);
    }
}

#[test]
fn registration_adapt_recovers_transform() {
    // 90 degrees about z plus a shift, one corrupted correspondence.
    let src: Vec<[f64; 3]> = (0..12)
        .map(|i| {
            let f = i as f64;
            [f.sin(), (1.3 * f).cos(), 0.1 * f]
        })
        .collect();
    let mut dst: Vec<[f64; 3]> = src.iter().map(|p| [-p[1] + 1.0, p[0] - 2.0, p[2] + 0.5]).collect();
    dst[5] = [9.0, 9.0, 9.0];
    let (s, d): (Vec<f64>, Vec<f64>) = (src.concat(), dst.concat());

    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { mts_registration_problem_new(s.as_ptr(), d.as_ptr(), 12, &mut p) },
        MtsStatus::Ok
    );
    let mut cfg = MtsAdaptConfig {
        gamma: 0.99,
        delta: 1e-6,
        t_conv: 2,
        g_step: 1,
        min_measurements: 0,
        max_solver_calls: 0,
    };
    cfg.delta = 1e-6;
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { mts_registration_adapt(p, &cfg, &mut res) }, MtsStatus::Ok);
    let mut est = [0.0; 12];
    assert_eq!(unsafe { mts_adapt_result_estimate(res, est.as_mut_ptr(), 12) }, 12);
    let expected = [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, -2.0, 0.5];
    for (a, b) in est.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9, "{est:?}");
    }
    let mut idx = [0usize; 12];
    let n = unsafe { mts_adapt_result_outliers(res, idx.as_mut_ptr(), 12) };
    assert!(idx[..n].contains(&5));
    unsafe {
        mts_adapt_result_free(res);
        mts_registration_problem_free(p);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut p = ptr::null_mut();
    let ys = [1.0, 2.0];
    let status = unsafe { mts_linear_problem_new(ptr::null(), ys.as_ptr(), 2, 1, &mut p) };
    assert_eq!(status, MtsStatus::NullPointer);
    assert!(last_error().contains("design"));
    assert!(p.is_null());

    let status = unsafe { mts_linear_problem_new(ys.as_ptr(), ys.as_ptr(), 0, 1, &mut p) };
    assert_eq!(status, MtsStatus::InvalidArgument);

    let p = scalar_problem(&[1.0, 2.0, 3.0]);
    let mut chi = 0.0;
    let bad = [7usize];
    assert_eq!(
        unsafe { mts_linear_chi(p, bad.as_ptr(), 1, &mut chi) },
        MtsStatus::IndexOutOfRange
    );
    assert!(!last_error().is_empty());
    let all = [0usize, 1, 2];
    assert_eq!(
        unsafe { mts_linear_chi(p, all.as_ptr(), 3, &mut chi) },
        MtsStatus::TooFewInliers
    );

    let cfg = MtsAdaptConfig {
        gamma: 1.5,
        delta: 1e-3,
        t_conv: 2,
        g_step: 1,
        min_measurements: 0,
        max_solver_calls: 0,
    };
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mts_linear_adapt(p, &cfg, &mut res) },
        MtsStatus::InvalidArgument
    );
    assert!(last_error().contains("gamma"));
    assert_eq!(
        unsafe { mts_linear_adapt(ptr::null(), ptr::null(), &mut res) },
        MtsStatus::NullPointer
    );
    assert_eq!(
        unsafe { mts_linear_adapt(p, ptr::null(), ptr::null_mut()) },
        MtsStatus::NullPointer
    );

    let mut term = MtsTermination::Converged;
    assert_eq!(
        unsafe { mts_adapt_result_termination(ptr::null(), &mut term) },
        MtsStatus::NullPointer
    );
    assert!(unsafe { mts_adapt_result_residual(ptr::null()) }.is_nan());
    assert_eq!(unsafe { mts_adapt_result_outliers(ptr::null(), ptr::null_mut(), 0) }, 0);

    let degenerate = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0];
    let mut rp = ptr::null_mut();
    assert_eq!(
        unsafe { mts_registration_problem_new(degenerate.as_ptr(), degenerate.as_ptr(), 3, &mut rp) },
        MtsStatus::Ok
    );
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { mts_registration_adapt(rp, ptr::null(), &mut res) },
        MtsStatus::SolverDegenerate
    );

    unsafe {
        mts_linear_problem_free(p);
        mts_registration_problem_free(rp);
        mts_linear_problem_free(ptr::null_mut());
        mts_adapt_result_free(ptr::null_mut());
    }
}

#[test]
fn chi_and_quantile() {
    let mut v = 0.0;
    assert_eq!(unsafe { mts_chi_bound(10.0, 2.0, &mut v) }, MtsStatus::Ok);
    assert_eq!(v, 0.25);
    assert_eq!(unsafe { mts_chi_bound(10.0, 10.0, &mut v) }, MtsStatus::Ok);
    assert!(v.is_infinite());
    assert_eq!(unsafe { mts_chi_bound(1.0, 2.0, &mut v) }, MtsStatus::InvalidArgument);
    assert_eq!(
        unsafe { mts_chi_bound(1.0, 0.5, ptr::null_mut()) },
        MtsStatus::NullPointer
    );
    assert_eq!(unsafe { mts_chi2_quantile(0.99, 1, &mut v) }, MtsStatus::Ok);
    assert!((v - 6.634_896_601_021_214).abs() < 1e-8);
    assert_eq!(unsafe { mts_chi2_quantile(0.5, 0, &mut v) }, MtsStatus::InvalidArgument);
}
