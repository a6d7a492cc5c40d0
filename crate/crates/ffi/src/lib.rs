//! C interface to `mts-core`.
//!
//! Problems and results are opaque heap objects created by `*_new` or
//! `*_adapt` functions and released with the matching `*_free`. Every fallible
//! function returns an [`MtsStatus`]; on failure, [`mts_last_error_message`]
//! describes the most recent error on the calling thread. Panics never cross
//! the boundary: they are reported as `MTS_STATUS_INTERNAL`.
//!
//! Registration estimates are exported as 12 doubles: the rotation in
//! row-major order followed by the translation.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mts_core::adapt::{adapt_run, AdaptConfig, AdaptResult, Termination};
use mts_core::bounds::chi_bound;
use mts_core::datagen::chi2_quantile;
use mts_core::solvers::{LinearProblem, Point3, RegistrationProblem, RigidTransform};
use mts_core::{total_residual, Error, MtsProblem, OutlierSet, SolverError};
use nalgebra::{DMatrix, DVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooFewInliers = 3,
    SolverDegenerate = 4,
    IndexOutOfRange = 5,
    ProblemTooSmall = 6,
    NonFinite = 7,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtsTermination {
    MinMeasurements = 0,
    Converged = 1,
    CallCapReached = 2,
}

/// ADAPT parameters. Zero in `min_measurements` or `max_solver_calls` selects
/// the library default (the solver minimum and `4 |M|`).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtsAdaptConfig {
    pub gamma: f64,
    pub delta: f64,
    pub t_conv: usize,
    pub g_step: usize,
    pub min_measurements: usize,
    pub max_solver_calls: usize,
}

impl From<MtsAdaptConfig> for AdaptConfig {
    fn from(c: MtsAdaptConfig) -> Self {
        let nonzero = |v: usize| (v != 0).then_some(v);
        AdaptConfig {
            min_measurements: nonzero(c.min_measurements),
            gamma: c.gamma,
            delta: c.delta,
            t_conv: c.t_conv,
            g_step: c.g_step,
            max_solver_calls: nonzero(c.max_solver_calls),
        }
    }
}

pub struct MtsLinearProblem(LinearProblem);

pub struct MtsRegistrationProblem(RegistrationProblem);

pub struct MtsAdaptResult {
    outliers: Vec<usize>,
    estimate: Vec<f64>,
    residual: f64,
    solver_calls: usize,
    iterations: usize,
    termination: MtsTermination,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(MtsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::TooFewInliers { .. } => MtsStatus::TooFewInliers,
            Error::SolverDegenerate(_) => MtsStatus::SolverDegenerate,
            Error::IndexOutOfRange { .. } | Error::DuplicateIndex { .. } => MtsStatus::IndexOutOfRange,
            Error::ProblemTooSmall { .. } => MtsStatus::ProblemTooSmall,
            Error::NonFiniteResidual { .. } => MtsStatus::NonFinite,
            _ => MtsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        Error::from(e).into()
    }
}

fn null(name: &str) -> Failure {
    Failure(MtsStatus::NullPointer, format!("{name} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(MtsStatus::InvalidArgument, message.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MtsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal error: {message}"));
            MtsStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or a live handle from this library.
unsafe fn handle<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(name))
}

fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: non-null, and the caller guarantees it is writable.
    unsafe { out.write(value) };
    Ok(())
}

/// Copies up to `capacity` items into `buf` and returns the full length.
///
/// # Safety
/// `buf` must be null or valid for `capacity` writes.
unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, capacity: usize) -> usize {
    if !buf.is_null() {
        let n = src.len().min(capacity);
        ptr::copy_nonoverlapping(src.as_ptr(), buf, n);
    }
    src.len()
}

/// Description of the last error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mts_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `out` with the default ADAPT parameters (`gamma = 0.99`,
/// `delta = 1e-4`, `t_conv = 2`, `g_step = 1`).
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_config_default(out: *mut MtsAdaptConfig) -> MtsStatus {
    guard(|| {
        let d = AdaptConfig::default();
        write_out(
            out,
            MtsAdaptConfig {
                gamma: d.gamma,
                delta: d.delta,
                t_conv: d.t_conv,
                g_step: d.g_step,
                min_measurements: 0,
                max_solver_calls: 0,
            },
            "out",
        )
    })
}

/// Linear problem `y_i = a_i^T x` from a row-major `m x n` design matrix and
/// `m` observations.
///
/// # Safety
/// `design` must hold `m * n` doubles, `observations` `m` doubles, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mts_linear_problem_new(
    design: *const f64,
    observations: *const f64,
    m: usize,
    n: usize,
    out: *mut *mut MtsLinearProblem,
) -> MtsStatus {
    guard(|| {
        if m == 0 || n == 0 {
            return Err(invalid("m and n must be positive"));
        }
        let len = m.checked_mul(n).ok_or_else(|| invalid("m * n overflows"))?;
        let a = slice(design, len, "design")?;
        let y = slice(observations, m, "observations")?;
        let problem = LinearProblem::new(DMatrix::from_row_slice(m, n, a), DVector::from_column_slice(y))?;
        write_out(out, Box::into_raw(Box::new(MtsLinearProblem(problem))), "out")
    })
}

/// # Safety
/// `problem` must be null or a handle from `mts_linear_problem_new` that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn mts_linear_problem_free(problem: *mut MtsLinearProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Registration problem from `count` index-aligned correspondences, each a
/// packed `x, y, z` triple.
///
/// # Safety
/// `source` and `target` must hold `3 * count` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mts_registration_problem_new(
    source: *const f64,
    target: *const f64,
    count: usize,
    out: *mut *mut MtsRegistrationProblem,
) -> MtsStatus {
    guard(|| {
        let len = count.checked_mul(3).ok_or_else(|| invalid("count overflows"))?;
        let points = |p: &[f64]| p.chunks_exact(3).map(Point3::from_column_slice).collect::<Vec<_>>();
        let src = points(slice(source, len, "source")?);
        let dst = points(slice(target, len, "target")?);
        let problem = RegistrationProblem::new(src, dst)?;
        write_out(out, Box::into_raw(Box::new(MtsRegistrationProblem(problem))), "out")
    })
}

/// # Safety
/// `problem` must be null or a handle from `mts_registration_problem_new`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn mts_registration_problem_free(problem: *mut MtsRegistrationProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

fn export_transform(t: &RigidTransform) -> Vec<f64> {
    let r = &t.rotation;
    let mut v: Vec<f64> = (0..3).flat_map(|i| (0..3).map(move |j| r[(i, j)])).collect();
    v.extend(t.translation.iter());
    v
}

fn run_adapt<P: MtsProblem>(
    problem: &P,
    config: *const MtsAdaptConfig,
    out: *mut *mut MtsAdaptResult,
    export: impl Fn(&P::Estimate) -> Vec<f64>,
) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let cfg: AdaptConfig = match unsafe { config.as_ref() } {
        Some(c) => (*c).into(),
        None => AdaptConfig::default(),
    };
    let AdaptResult {
        outliers,
        estimate,
        residual,
        iterations,
        solver_calls,
        termination,
        ..
    } = adapt_run(problem, &cfg)?;
    let result = MtsAdaptResult {
        outliers: outliers.as_slice().to_vec(),
        estimate: export(&estimate),
        residual,
        solver_calls,
        iterations,
        termination: match termination {
            Termination::MinMeasurements => MtsTermination::MinMeasurements,
            Termination::Converged => MtsTermination::Converged,
            Termination::CallCapReached => MtsTermination::CallCapReached,
        },
    };
    write_out(out, Box::into_raw(Box::new(result)), "out")
}

/// Runs ADAPT. A null `config` selects the defaults.
///
/// # Safety
/// `problem` must be a live handle, `config` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mts_linear_adapt(
    problem: *const MtsLinearProblem,
    config: *const MtsAdaptConfig,
    out: *mut *mut MtsAdaptResult,
) -> MtsStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        run_adapt(&p.0, config, out, |x| x.as_slice().to_vec())
    })
}

/// Runs ADAPT. A null `config` selects the defaults.
///
/// # Safety
/// `problem` must be a live handle, `config` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mts_registration_adapt(
    problem: *const MtsRegistrationProblem,
    config: *const MtsAdaptConfig,
    out: *mut *mut MtsAdaptResult,
) -> MtsStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        run_adapt(&p.0, config, out, export_transform)
    })
}

/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_free(result: *mut MtsAdaptResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Copies up to `capacity` rejected indices (ascending) into `buf` and
/// returns how many there are. Pass a null `buf` to query the count.
///
/// # Safety
/// `result` must be a live handle; `buf` null or valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_outliers(
    result: *const MtsAdaptResult,
    buf: *mut usize,
    capacity: usize,
) -> usize {
    match result.as_ref() {
        Some(r) => copy_out(&r.outliers, buf, capacity),
        None => 0,
    }
}

/// Copies up to `capacity` estimate components into `buf` and returns the
/// estimate's length (`n` for linear problems, 12 for registration).
///
/// # Safety
/// `result` must be a live handle; `buf` null or valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_estimate(
    result: *const MtsAdaptResult,
    buf: *mut f64,
    capacity: usize,
) -> usize {
    match result.as_ref() {
        Some(r) => copy_out(&r.estimate, buf, capacity),
        None => 0,
    }
}

/// `r(O)` of the returned rejection; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_residual(result: *const MtsAdaptResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.residual)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_solver_calls(result: *const MtsAdaptResult) -> usize {
    result.as_ref().map_or(0, |r| r.solver_calls)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_iterations(result: *const MtsAdaptResult) -> usize {
    result.as_ref().map_or(0, |r| r.iterations)
}

/// # Safety
/// `result` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mts_adapt_result_termination(
    result: *const MtsAdaptResult,
    out: *mut MtsTermination,
) -> MtsStatus {
    guard(|| write_out(out, handle(result, "result")?.termination, "out"))
}

/// `chi = r_outliers / (r_empty - r_outliers)`; infinity when the rejection
/// bought no reduction.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mts_chi_bound(r_empty: f64, r_outliers: f64, out: *mut f64) -> MtsStatus {
    guard(|| write_out(out, chi_bound(r_empty, r_outliers)?.as_f64(), "out"))
}

fn certificate<P: MtsProblem>(problem: &P, outliers: &[usize], out: *mut f64) -> Result<(), Failure> {
    let set = OutlierSet::new(outliers.to_vec())?;
    let r_empty = total_residual(problem, &OutlierSet::empty())?;
    let r_o = total_residual(problem, &set)?;
    write_out(out, chi_bound(r_empty, r_o)?.as_f64(), "out")
}

/// Certificate of an arbitrary rejection on a linear problem.
///
/// # Safety
/// `problem` must be a live handle, `outliers` valid for `count` reads, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mts_linear_chi(
    problem: *const MtsLinearProblem,
    outliers: *const usize,
    count: usize,
    out: *mut f64,
) -> MtsStatus {
    guard(|| certificate(&handle(problem, "problem")?.0, slice(outliers, count, "outliers")?, out))
}

/// Certificate of an arbitrary rejection on a registration problem.
///
/// # Safety
/// `problem` must be a live handle, `outliers` valid for `count` reads, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mts_registration_chi(
    problem: *const MtsRegistrationProblem,
    outliers: *const usize,
    count: usize,
    out: *mut f64,
) -> MtsStatus {
    guard(|| certificate(&handle(problem, "problem")?.0, slice(outliers, count, "outliers")?, out))
}

/// The `p`-quantile of the chi-square distribution with `dof` degrees of
/// freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mts_chi2_quantile(p: f64, dof: u32, out: *mut f64) -> MtsStatus {
    guard(|| {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("probability must lie in (0, 1), got {p}")));
        }
        if dof == 0 {
            return Err(invalid("degrees of freedom must be positive"));
        }
        write_out(out, chi2_quantile(p, dof), "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(mts_last_error_message()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn panics_become_internal_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, MtsStatus::Internal);
        assert!(last_error().contains("boom"));
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(mts_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn quantile_domain() {
        let mut q = 0.0;
        assert_eq!(unsafe { mts_chi2_quantile(1.0, 1, &mut q) }, MtsStatus::InvalidArgument);
        assert!(last_error().contains("(0, 1)"));
        assert_eq!(unsafe { mts_chi2_quantile(0.99, 2, &mut q) }, MtsStatus::Ok);
        assert!((q - 9.210_340_371_976_18).abs() < 1e-9);
    }
}
