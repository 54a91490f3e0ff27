//! C ABI over the `strattest` library.
//!
//! Sequences and strategies are opaque heap handles created by `*_new` and
//! released by `*_free`. Every fallible call returns a [`StStatus`]; on
//! failure [`st_last_error`] returns a message for the calling thread.
//! Results are written through caller-provided out-pointers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use strattest::{
    chi_squared_gof, chi_squared_sf, count_categories, count_runs, generalized_runs_test,
    std_normal_cdf, strategy_test, ActionAlphabet, Alpha, Decision, Error, GofTestResult,
    MixedStrategy, PlaySequence, RunsTestResult,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SequenceTooShort = 3,
    NoObservations = 4,
    AlphabetMismatch = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StDecision {
    /// Fail to reject: play is consistent with the target.
    AcceptH0 = 0,
    RejectH0 = 1,
}

/// Opaque observed play sequence over actions `0..k`.
pub struct StSequence(PlaySequence);

/// Opaque target mixed strategy over actions `0..k`.
pub struct StStrategy(MixedStrategy);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StRunsResult {
    pub n: u64,
    pub r: u64,
    /// Sum of squared counts, saturated at `UINT64_MAX`.
    pub q: u64,
    /// Sum of cubed counts, saturated at `UINT64_MAX`.
    pub c: u64,
    pub mu: f64,
    pub sigma: f64,
    pub z: f64,
    pub p_value: f64,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StGofResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub small_expected: bool,
    pub zero_probability_violation: bool,
    pub degenerate: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StStrategyReport {
    pub runs: StRunsResult,
    pub gof: StGofResult,
    pub alpha: f64,
    pub decision: StDecision,
    pub rejected_by_runs: bool,
    pub rejected_by_chi2: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn status_of(err: &Error) -> StStatus {
    match err {
        Error::SequenceTooShort(_) | Error::EmptySequence => StStatus::SequenceTooShort,
        Error::NoObservations => StStatus::NoObservations,
        Error::AlphabetMismatch(_) | Error::DimensionMismatch { .. } => StStatus::AlphabetMismatch,
        Error::NoConvergence { .. } | Error::NonFinite => StStatus::Numerical,
        _ => StStatus::InvalidArgument,
    }
}

/// Runs `body`, recording errors and converting panics into a status.
fn guard(body: impl FnOnce() -> Result<(), (StStatus, String)>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            StStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            StStatus::Panic
        }
    }
}

fn core_err(err: Error) -> (StStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (StStatus, String) {
    (StStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (StStatus, String)> {
    // SAFETY: caller guarantees `p` is null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (StStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the caller contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn saturate(x: u128) -> u64 {
    u64::try_from(x).unwrap_or(u64::MAX)
}

impl From<&RunsTestResult> for StRunsResult {
    fn from(r: &RunsTestResult) -> Self {
        Self {
            n: r.n,
            r: r.r,
            q: saturate(r.q),
            c: saturate(r.c),
            mu: r.mu,
            sigma: r.sigma,
            z: r.z,
            p_value: r.p_value,
            degenerate: r.degenerate,
        }
    }
}

impl From<&GofTestResult> for StGofResult {
    fn from(g: &GofTestResult) -> Self {
        Self {
            statistic: g.statistic,
            df: g.df,
            p_value: g.p_value,
            small_expected: g.warnings.small_expected,
            zero_probability_violation: g.warnings.zero_probability_violation,
            degenerate: g.degenerate,
        }
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn st_status_message(status: StStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        StStatus::Ok => b"ok\0",
        StStatus::NullPointer => b"null pointer\0",
        StStatus::InvalidArgument => b"invalid argument\0",
        StStatus::SequenceTooShort => b"sequence too short\0",
        StStatus::NoObservations => b"no observations\0",
        StStatus::AlphabetMismatch => b"alphabet mismatch\0",
        StStatus::Numerical => b"numerical failure\0",
        StStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Creates a sequence of `len` action indices, each in `[0, k)`.
///
/// # Safety
/// `items` must point to `len` readable values (or be null when `len` is 0);
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_sequence_new(
    items: *const u32,
    len: usize,
    k: u32,
    out: *mut *mut StSequence,
) -> StStatus {
    guard(|| {
        let slice: &[u32] = if len == 0 {
            &[]
        } else if items.is_null() {
            return Err(null("items"));
        } else {
            // SAFETY: caller guarantees `len` readable elements.
            unsafe { std::slice::from_raw_parts(items, len) }
        };
        let alphabet = ActionAlphabet::indexed(k as usize).map_err(core_err)?;
        let seq = PlaySequence::new(alphabet, slice.iter().map(|&i| i as usize).collect())
            .map_err(core_err)?;
        let handle = Box::into_raw(Box::new(StSequence(seq)));
        // SAFETY: forwarded caller contract on `out`.
        unsafe { write_out(out, handle, "out") }.inspect_err(|_| {
            // SAFETY: `handle` came from Box::into_raw just above.
            drop(unsafe { Box::from_raw(handle) });
        })
    })
}

/// # Safety
/// `seq` must be null or a handle from [`st_sequence_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn st_sequence_free(seq: *mut StSequence) {
    if !seq.is_null() {
        // SAFETY: per the contract above.
        drop(unsafe { Box::from_raw(seq) });
    }
}

/// Number of plays, or 0 for a null handle.
///
/// # Safety
/// `seq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn st_sequence_len(seq: *const StSequence) -> usize {
    // SAFETY: per the contract above.
    unsafe { seq.as_ref() }.map_or(0, |s| s.0.len())
}

/// Writes the count of each action into `counts[0..k]`.
///
/// # Safety
/// `seq` must be a live handle; `counts` must be valid for `k` writes.
#[no_mangle]
pub unsafe extern "C" fn st_sequence_counts(
    seq: *const StSequence,
    counts: *mut u64,
    k: usize,
) -> StStatus {
    guard(|| {
        // SAFETY: per the contract above.
        let seq = unsafe { deref(seq, "seq") }?;
        let cv = count_categories(&seq.0);
        if k != cv.counts().len() {
            return Err((
                StStatus::AlphabetMismatch,
                format!(
                    "sequence has {} actions, buffer holds {k}",
                    cv.counts().len()
                ),
            ));
        }
        if counts.is_null() {
            return Err(null("counts"));
        }
        // SAFETY: non-null and valid for `k` writes per the contract.
        let dst = unsafe { std::slice::from_raw_parts_mut(counts, k) };
        dst.copy_from_slice(cv.counts());
        Ok(())
    })
}

/// Creates a mixed strategy from `k` probabilities summing to 1.
///
/// # Safety
/// `probs` must point to `k` readable values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_strategy_new(
    probs: *const f64,
    k: usize,
    out: *mut *mut StStrategy,
) -> StStatus {
    guard(|| {
        if probs.is_null() {
            return Err(null("probs"));
        }
        // SAFETY: caller guarantees `k` readable elements.
        let probs = unsafe { std::slice::from_raw_parts(probs, k) }.to_vec();
        let alphabet = ActionAlphabet::indexed(k).map_err(core_err)?;
        let strategy = MixedStrategy::new(alphabet, probs).map_err(core_err)?;
        let handle = Box::into_raw(Box::new(StStrategy(strategy)));
        // SAFETY: forwarded caller contract on `out`.
        unsafe { write_out(out, handle, "out") }.inspect_err(|_| {
            // SAFETY: `handle` came from Box::into_raw just above.
            drop(unsafe { Box::from_raw(handle) });
        })
    })
}

/// # Safety
/// `strategy` must be null or a handle from [`st_strategy_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn st_strategy_free(strategy: *mut StStrategy) {
    if !strategy.is_null() {
        // SAFETY: per the contract above.
        drop(unsafe { Box::from_raw(strategy) });
    }
}

/// # Safety
/// `seq` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_count_runs(seq: *const StSequence, out: *mut u64) -> StStatus {
    guard(|| {
        // SAFETY: per the contract above.
        let seq = unsafe { deref(seq, "seq") }?;
        let r = count_runs(&seq.0).map_err(core_err)?;
        // SAFETY: per the contract above.
        unsafe { write_out(out, r as u64, "out") }
    })
}

/// # Safety
/// `seq` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_runs_test(seq: *const StSequence, out: *mut StRunsResult) -> StStatus {
    guard(|| {
        // SAFETY: per the contract above.
        let seq = unsafe { deref(seq, "seq") }?;
        let res = generalized_runs_test(&seq.0).map_err(core_err)?;
        // SAFETY: per the contract above.
        unsafe { write_out(out, StRunsResult::from(&res), "out") }
    })
}

/// # Safety
/// `target` and `seq` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_chi_squared_gof(
    target: *const StStrategy,
    seq: *const StSequence,
    out: *mut StGofResult,
) -> StStatus {
    guard(|| {
        // SAFETY: per the contract above.
        let (target, seq) = unsafe { (deref(target, "target")?, deref(seq, "seq")?) };
        let res = chi_squared_gof(&target.0, &count_categories(&seq.0)).map_err(core_err)?;
        // SAFETY: per the contract above.
        unsafe { write_out(out, StGofResult::from(&res), "out") }
    })
}

/// Combined test: rejects when either subtest has `p <= alpha / 2`.
///
/// # Safety
/// `target` and `seq` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_strategy_test(
    target: *const StStrategy,
    seq: *const StSequence,
    alpha: f64,
    out: *mut StStrategyReport,
) -> StStatus {
    guard(|| {
        // SAFETY: per the contract above.
        let (target, seq) = unsafe { (deref(target, "target")?, deref(seq, "seq")?) };
        let alpha = Alpha::new(alpha).map_err(core_err)?;
        let rep = strategy_test(&target.0, &seq.0, alpha).map_err(core_err)?;
        let report = StStrategyReport {
            runs: StRunsResult::from(&rep.runs),
            gof: StGofResult::from(&rep.gof),
            alpha: alpha.value(),
            decision: match rep.decision {
                Decision::AcceptH0 => StDecision::AcceptH0,
                Decision::RejectH0 => StDecision::RejectH0,
            },
            rejected_by_runs: rep.rejected_by.runs,
            rejected_by_chi2: rep.rejected_by.chi2,
        };
        // SAFETY: per the contract above.
        unsafe { write_out(out, report, "out") }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_std_normal_cdf(z: f64, out: *mut f64) -> StStatus {
    guard(|| {
        let p = std_normal_cdf(z).map_err(core_err)?;
        // SAFETY: per the contract above.
        unsafe { write_out(out, p, "out") }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn st_chi_squared_sf(t: f64, df: u32, out: *mut f64) -> StStatus {
    guard(|| {
        let p = chi_squared_sf(t, df).map_err(core_err)?;
        // SAFETY: per the contract above.
        unsafe { write_out(out, p, "out") }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
