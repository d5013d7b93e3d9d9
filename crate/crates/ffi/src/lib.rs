//! C ABI over the sparse-al acquisition solvers.
//!
//! Problems and results are opaque heap handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`SaStatus`]; on failure a message is kept per thread and can be read
//! with [`sa_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::{Array2, Array3};
use sparse_al::embeddings::{assemble_problem, EmbeddingMode, EmbeddingSet, LabelDistribution};
use sparse_al::solvers::{brute_force_solve, greedy_solve, iht_solve, GreedyConfig, IhtConfig, ProxMode, SolveResult};
use sparse_al::{Error, SparseApproxProblem};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    BudgetExceedsPool = 4,
    ProblemTooLarge = 5,
    DegenerateDirection = 6,
    Internal = 7,
}

/// An acquisition problem `(v, Φ, σ², α, β, b)`.
pub struct SaProblem {
    inner: SparseApproxProblem,
}

/// A solver outcome: weights, objective and selected batch.
pub struct SaResult {
    inner: SolveResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: SaStatus, message: impl Into<String>) -> SaStatus {
    set_error(message.into());
    status
}

fn status_of(err: &Error) -> SaStatus {
    match err {
        Error::DimensionMismatch(_) => SaStatus::DimensionMismatch,
        Error::BudgetExceedsPool { .. } => SaStatus::BudgetExceedsPool,
        Error::ProblemTooLarge { .. } => SaStatus::ProblemTooLarge,
        Error::DegenerateDirection => SaStatus::DegenerateDirection,
        _ => SaStatus::InvalidArgument,
    }
}

fn from_error(err: Error) -> SaStatus {
    fail(status_of(&err), err.to_string())
}

/// Runs `body`, turning a panic into `SaStatus::Internal`.
fn guarded(body: impl FnOnce() -> SaStatus) -> SaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SaStatus::Internal, "internal panic"),
    }
}

/// Copies `len` doubles from `data`, which may only be null when `len == 0`.
unsafe fn read_slice(data: *const f64, len: usize, name: &str) -> Result<Vec<f64>, SaStatus> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(fail(SaStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(data, len).to_vec())
}

fn publish<T>(out: *mut *mut T, value: T) -> SaStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    SaStatus::Ok
}

/// Message for the last failure on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a problem from explicit data.
///
/// `v` has `m` entries, `phi` has `m * n` entries in column-major order and
/// `sigma2` has `n` entries.
///
/// # Safety
/// Every pointer must be valid for the stated number of reads, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_problem_new(
    m: usize,
    n: usize,
    v: *const f64,
    phi: *const f64,
    sigma2: *const f64,
    alpha: f64,
    beta: f64,
    b: usize,
    out: *mut *mut SaProblem,
) -> SaStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SaStatus::NullPointer, "out is null");
        }
        let Some(mn) = m.checked_mul(n) else {
            return fail(SaStatus::InvalidArgument, "m * n overflows");
        };
        let parts = (|| Ok((read_slice(v, m, "v")?, read_slice(phi, mn, "phi")?, read_slice(sigma2, n, "sigma2")?)))();
        let (v, phi, sigma2) = match parts {
            Ok(p) => p,
            Err(status) => return status,
        };
        match SparseApproxProblem::new(v, phi, sigma2, alpha, beta, b) {
            Ok(inner) => publish(out, SaProblem { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Assembles a problem from per-label embeddings and label probabilities.
///
/// `embeddings` holds `n * k * d` doubles in row-major `[candidate][label][dim]`
/// order and `probs` holds `n * k` row-stochastic doubles.
///
/// # Safety
/// Every pointer must be valid for the stated number of reads, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sa_problem_assemble(
    n: usize,
    k: usize,
    d: usize,
    embeddings: *const f64,
    probs: *const f64,
    alpha: f64,
    beta: f64,
    b: usize,
    out: *mut *mut SaProblem,
) -> SaStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SaStatus::NullPointer, "out is null");
        }
        let (Some(nk), Some(nkd)) = (n.checked_mul(k), n.checked_mul(k).and_then(|x| x.checked_mul(d))) else {
            return fail(SaStatus::InvalidArgument, "n * k * d overflows");
        };
        let (g, p) = match (read_slice(embeddings, nkd, "embeddings"), read_slice(probs, nk, "probs")) {
            (Ok(g), Ok(p)) => (g, p),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let built = Array3::from_shape_vec((n, k, d), g)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))
            .and_then(|g| EmbeddingSet::new(g, EmbeddingMode::Gradient))
            .and_then(|emb| {
                let probs = Array2::from_shape_vec((n, k), p).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
                let dist = LabelDistribution::new(probs)?;
                assemble_problem(&emb, &dist, alpha, beta, b)
            });
        match built {
            Ok(inner) => publish(out, SaProblem { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Embedding dimension `m` of a problem, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sa_problem_m(problem: *const SaProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.m())
}

/// Pool size `n` of a problem, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sa_problem_n(problem: *const SaProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.n())
}

/// Releases a problem. Null is ignored.
///
/// # Safety
/// `problem` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sa_problem_free(problem: *mut SaProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

unsafe fn solve_with(
    problem: *const SaProblem,
    out: *mut *mut SaResult,
    solve: impl FnOnce(&SparseApproxProblem) -> sparse_al::Result<SolveResult>,
) -> SaStatus {
    guarded(|| {
        let Some(p) = problem.as_ref() else {
            return fail(SaStatus::NullPointer, "problem is null");
        };
        if out.is_null() {
            return fail(SaStatus::NullPointer, "out is null");
        }
        match solve(&p.inner) {
            Ok(inner) => publish(out, SaResult { inner }),
            Err(e) => from_error(e),
        }
    })
}

/// Greedy forward selection with scoring step `tau`.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sa_solve_greedy(problem: *const SaProblem, tau: f64, out: *mut *mut SaResult) -> SaStatus {
    solve_with(problem, out, |p| greedy_solve(p, &GreedyConfig { tau }))
}

/// Proximal iterative hard thresholding.
///
/// `stall_tolerance` of 0 runs the full `iterations`. Setting
/// `paper_literal_prox` ranks thresholding candidates without the cost of
/// leaving them out.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sa_solve_iht(
    problem: *const SaProblem,
    iterations: usize,
    stall_tolerance: f64,
    paper_literal_prox: bool,
    out: *mut *mut SaResult,
) -> SaStatus {
    let prox_mode = if paper_literal_prox { ProxMode::PaperLiteral } else { ProxMode::Corrected };
    solve_with(problem, out, |p| iht_solve(p, &IhtConfig { iterations, stall_tolerance, prox_mode }))
}

/// Exhaustive search over supports; refuses large instances.
///
/// # Safety
/// `problem` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sa_solve_oracle(problem: *const SaProblem, out: *mut *mut SaResult) -> SaStatus {
    solve_with(problem, out, brute_force_solve)
}

/// Objective value `f1 + f2` at the returned weights, NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sa_result_objective(result: *const SaResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.objective)
}

/// Length of the weight vector, 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sa_result_len(result: *const SaResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.w.len())
}

/// Number of selected indices, 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sa_result_selected_len(result: *const SaResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.selected.len())
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, capacity: usize) -> SaStatus {
    if capacity < src.len() {
        return fail(SaStatus::InvalidArgument, format!("buffer holds {capacity} entries, {} needed", src.len()));
    }
    if src.is_empty() {
        return SaStatus::Ok;
    }
    if dst.is_null() {
        return fail(SaStatus::NullPointer, "buffer is null");
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    SaStatus::Ok
}

/// Copies the weights into `buf`, which must hold `sa_result_len` doubles.
///
/// # Safety
/// `result` must be a live handle and `buf` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sa_result_weights(result: *const SaResult, buf: *mut f64, capacity: usize) -> SaStatus {
    guarded(|| match result.as_ref() {
        Some(r) => copy_out(r.inner.w.as_slice(), buf, capacity),
        None => fail(SaStatus::NullPointer, "result is null"),
    })
}

/// Copies the selected indices into `buf`, which must hold
/// `sa_result_selected_len` entries.
///
/// # Safety
/// `result` must be a live handle and `buf` valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn sa_result_selected(result: *const SaResult, buf: *mut usize, capacity: usize) -> SaStatus {
    guarded(|| match result.as_ref() {
        Some(r) => copy_out(&r.inner.selected, buf, capacity),
        None => fail(SaStatus::NullPointer, "result is null"),
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `result` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sa_result_free(result: *mut SaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn errors_set_a_message() {
        let mut out = ptr::null_mut();
        let v = [1.0];
        let status = unsafe { sa_problem_new(1, 2, v.as_ptr(), ptr::null(), ptr::null(), 0.0, 0.0, 1, &mut out) };
        assert_eq!(status, SaStatus::NullPointer);
        assert!(out.is_null());
        let msg = unsafe { CStr::from_ptr(sa_last_error_message()) }.to_str().unwrap();
        assert_eq!(msg, "phi is null");
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::BudgetExceedsPool { budget: 3, pool: 2 }), SaStatus::BudgetExceedsPool);
        assert_eq!(status_of(&Error::DegenerateDirection), SaStatus::DegenerateDirection);
        assert_eq!(status_of(&Error::InvalidProblem(String::new())), SaStatus::InvalidArgument);
    }

    #[test]
    fn null_handles_are_harmless() {
        unsafe {
            sa_problem_free(ptr::null_mut());
            sa_result_free(ptr::null_mut());
            assert_eq!(sa_problem_n(ptr::null()), 0);
            assert!(sa_result_objective(ptr::null()).is_nan());
        }
    }
}
