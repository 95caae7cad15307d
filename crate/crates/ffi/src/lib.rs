//! C interface to the twoscale solver.
//!
//! Every function returns a [`TsStatus`]. On failure the message is kept per
//! thread and can be copied out with [`ts_last_error_message`]. Handles are
//! opaque; release each with its `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twoscale::mittag_leffler::mittag_leffler;
use twoscale::study::{run_study, table_def, ConvergenceReport, NormKind, Preset, StudySpec, Vary};
use twoscale::time_l1::solve_with_policy;
use twoscale::{l1_weights, Error, ProblemSpec, QuadratureConfig, SnapshotPolicy, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Factorization = 3,
    NonFinite = 4,
    QuadratureNotConverged = 5,
    Io = 6,
    BufferTooSmall = 7,
    OutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsPreset {
    /// Indicator initial value, no source.
    A = 0,
    /// Zero initial value, singular source.
    B = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsVary {
    Spatial = 0,
    Temporal = 1,
}

pub struct TsProblem(ProblemSpec);
pub struct TsTrajectory(Trajectory);
pub struct TsReport(ConvergenceReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TsStatus {
    match e {
        Error::InvalidInput(_) => TsStatus::InvalidInput,
        Error::Factorization(_) => TsStatus::Factorization,
        Error::NonFinite(_) => TsStatus::NonFinite,
        Error::QuadratureNotConverged { .. } => TsStatus::QuadratureNotConverged,
        Error::Solver { source, .. } => status_of(source),
        Error::Io { .. } | Error::Parse { .. } => TsStatus::Io,
    }
}

struct Fail(TsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TsStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            TsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(TsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], Fail> {
    if len < need {
        return Err(Fail(
            TsStatus::BufferTooSmall,
            format!("buffer holds {len}, need {need}"),
        ));
    }
    if p.is_null() {
        return Err(null("output buffer"));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(v);
    Ok(())
}

/// Copies the last error of this thread into `buf` (NUL terminated, truncated
/// to `len`) and returns the full message length excluding the NUL. Returns 0
/// when no error is pending.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ts_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// E_α(−x) for 0 < α < 1 and x ≥ 0.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ts_mittag_leffler(alpha: f64, x: f64, out: *mut f64) -> TsStatus {
    guard(|| write(out, mittag_leffler(alpha, x)?))
}

/// L1 weights for `m` steps: `b` receives b_0..b_{m−1}, `d` the scaled
/// differences d_0..d_{m−1}. Either buffer may be null to skip it.
///
/// # Safety
/// Non-null buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_l1_weights(
    alpha: f64,
    tau: f64,
    m: usize,
    b: *mut f64,
    d: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let w = l1_weights(alpha, tau, m)?;
        if !b.is_null() {
            out_slice(b, len, m)?.copy_from_slice(&w.b[..m]);
        }
        if !d.is_null() {
            out_slice(d, len, m)?.copy_from_slice(&w.d[..m]);
        }
        Ok(())
    })
}

/// Creates one of the two built-in problems on (0, 1) with T = 1.
///
/// # Safety
/// `out` must be valid for a write. The handle must be released with
/// [`ts_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn ts_problem_preset(
    preset: TsPreset,
    alpha: f64,
    s: f64,
    out: *mut *mut TsProblem,
) -> TsStatus {
    guard(|| {
        let p = match preset {
            TsPreset::A => Preset::A,
            TsPreset::B => Preset::B,
        }
        .problem(alpha, s)?;
        write(out, Box::into_raw(Box::new(TsProblem(p))))
    })
}

/// # Safety
/// `p` must be null or a handle from [`ts_problem_preset`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ts_problem_free(p: *mut TsProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Solves with `n` elements and `m` steps. With `all_snapshots` nonzero every
/// time level is kept, otherwise only the initial and final ones.
///
/// # Safety
/// `problem` must be a live handle and `out` valid for a write. Release the
/// result with [`ts_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn ts_solve(
    problem: *const TsProblem,
    n: usize,
    m: usize,
    all_snapshots: i32,
    out: *mut *mut TsTrajectory,
) -> TsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        let policy = if all_snapshots != 0 {
            SnapshotPolicy::All
        } else {
            SnapshotPolicy::FinalOnly
        };
        let t = solve_with_policy(&p.0, n, m, &QuadratureConfig::default(), &policy)?;
        write(out, Box::into_raw(Box::new(TsTrajectory(t))))
    })
}

/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn ts_trajectory_free(t: *mut TsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of stored snapshots.
///
/// # Safety
/// `t` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ts_trajectory_snapshot_count(
    t: *const TsTrajectory,
    out: *mut usize,
) -> TsStatus {
    guard(|| write(out, deref(t, "trajectory")?.0.snapshots.len()))
}

/// Interior unknowns per snapshot (N − 1).
///
/// # Safety
/// `t` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ts_trajectory_dofs(t: *const TsTrajectory, out: *mut usize) -> TsStatus {
    guard(|| write(out, deref(t, "trajectory")?.0.mesh.interior_dofs()))
}

/// Time and interior nodal values of snapshot `k`. `values` must hold at
/// least [`ts_trajectory_dofs`] doubles.
///
/// # Safety
/// `t` must be a live handle, `time` valid for a write, `values` valid for
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_trajectory_snapshot(
    t: *const TsTrajectory,
    k: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let t = &deref(t, "trajectory")?.0;
        let snap = t.snapshots.get(k).ok_or_else(|| {
            Fail(
                TsStatus::OutOfRange,
                format!("snapshot {k} of {}", t.snapshots.len()),
            )
        })?;
        let c = snap.values.coeffs();
        out_slice(values, len, c.len())?.copy_from_slice(c);
        write(time, t.time(snap.step))
    })
}

/// Self-refinement study. `levels` lists `n_levels` doubling resolutions on the
/// varied axis, `fixed` the other one. `rho` selects the Ĥ^ρ norm; pass NaN
/// for L².
///
/// # Safety
/// `problem` must be a live handle, `levels` valid for `n_levels` reads and
/// `out` valid for a write. Release the result with [`ts_report_free`].
#[no_mangle]
pub unsafe extern "C" fn ts_run_study(
    problem: *const TsProblem,
    vary: TsVary,
    levels: *const usize,
    n_levels: usize,
    fixed: usize,
    rho: f64,
    out: *mut *mut TsReport,
) -> TsStatus {
    guard(|| {
        let p = deref(problem, "problem")?;
        if levels.is_null() {
            return Err(null("levels"));
        }
        let spec = StudySpec {
            problem: p.0.clone(),
            vary: match vary {
                TsVary::Spatial => Vary::Spatial,
                TsVary::Temporal => Vary::Temporal,
            },
            levels: std::slice::from_raw_parts(levels, n_levels).to_vec(),
            fixed,
            norm: if rho.is_nan() {
                NormKind::L2
            } else {
                NormKind::Hsigma(rho)
            },
            quadrature: QuadratureConfig::default(),
        };
        write(out, Box::into_raw(Box::new(TsReport(run_study(&spec)?))))
    })
}

/// Number of rows of a built-in table (1 through 8).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ts_table_rows(number: u8, out: *mut usize) -> TsStatus {
    guard(|| write(out, table_def(number)?.rows.len()))
}

/// Runs row `row` of built-in table `number`.
///
/// # Safety
/// `out` must be valid for a write. Release the result with [`ts_report_free`].
#[no_mangle]
pub unsafe extern "C" fn ts_run_table_row(
    number: u8,
    row: usize,
    out: *mut *mut TsReport,
) -> TsStatus {
    guard(|| {
        let specs = table_def(number)?.specs(&QuadratureConfig::default())?;
        let n = specs.len();
        let spec = specs
            .get(row)
            .ok_or_else(|| Fail(TsStatus::OutOfRange, format!("row {row} of {n}")))?;
        write(out, Box::into_raw(Box::new(TsReport(run_study(spec)?))))
    })
}

/// # Safety
/// `r` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn ts_report_free(r: *mut TsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// (α, s) of the study.
///
/// # Safety
/// `r` must be a live handle; `alpha` and `s` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ts_report_orders(
    r: *const TsReport,
    alpha: *mut f64,
    s: *mut f64,
) -> TsStatus {
    guard(|| {
        let p = &deref(r, "report")?.0.spec.problem;
        write(alpha, p.alpha)?;
        write(s, p.s)
    })
}

/// Number of errors; there is one rate fewer.
///
/// # Safety
/// `r` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ts_report_len(r: *const TsReport, out: *mut usize) -> TsStatus {
    guard(|| write(out, deref(r, "report")?.0.errors.len()))
}

/// # Safety
/// `r` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_report_errors(
    r: *const TsReport,
    buf: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let e = &deref(r, "report")?.0.errors;
        out_slice(buf, len, e.len())?.copy_from_slice(e);
        Ok(())
    })
}

/// # Safety
/// `r` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ts_report_rates(
    r: *const TsReport,
    buf: *mut f64,
    len: usize,
) -> TsStatus {
    guard(|| {
        let v = &deref(r, "report")?.0.rates;
        out_slice(buf, len, v.len())?.copy_from_slice(v);
        Ok(())
    })
}
