//! C interface to `klac`.
//!
//! Every fallible call returns a [`KlacStatus`]; on failure the message is
//! available from [`klac_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function. Strings returned as
//! `char *` are owned by the caller and released with [`klac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use klac::graph::{branch_pass, scr_for_k, search_min_subset, SchemeResult, SearchLimits};
use klac::universal::{build_scheme, lower_bound_tk, LimitedAccessScheme};
use klac::{BitMatrix, BitVector, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlacStatus {
    Ok = 0,
    InvalidInput = 1,
    DimensionMismatch = 2,
    Parse = 3,
    Refused = 4,
    Infeasible = 5,
    SimulationFailure = 6,
    Io = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KlacGraphMethod {
    /// Repeated circuit reduction; `k` must be a power of two.
    Scr = 0,
    /// Branching followed by minimum subset search.
    BranchSearch = 1,
}

/// Privacy figures in bits for one `(m, T, k, s)` point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KlacPrivacyReport {
    pub entropy_exact: f64,
    pub entropy_approx: f64,
    pub mil_upper_exact: f64,
    pub mil_upper_asymptotic: f64,
    pub mil_conventional_lower: f64,
}

/// A universal scheme for given `(T, n, k)`.
pub struct KlacScheme {
    inner: LimitedAccessScheme,
}

/// A scheme built for one concrete set of client vectors.
pub struct KlacGraphScheme {
    inner: SchemeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> KlacStatus {
    match err {
        Error::InvalidInput(_) | Error::CompletionRejected(_) => KlacStatus::InvalidInput,
        Error::DimensionMismatch { .. } => KlacStatus::DimensionMismatch,
        Error::Parse { .. } => KlacStatus::Parse,
        Error::Refused(_) => KlacStatus::Refused,
        Error::Infeasible(_) => KlacStatus::Infeasible,
        Error::SimulationFailure { .. } => KlacStatus::SimulationFailure,
        Error::Io(_) | Error::Csv(_) => KlacStatus::Io,
    }
}

struct Fail(KlacStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KlacStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KlacStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            KlacStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(KlacStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(KlacStatus::InvalidInput, format!("{what} is not utf-8")))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

/// Copies 1-based row numbers into `out`, reporting the full count in `len`.
unsafe fn write_rows(rows: &[usize], out: *mut usize, cap: usize, len: *mut usize) -> Result<(), Fail> {
    write(len, rows.len(), "len")?;
    if rows.len() > cap {
        return Err(Fail(
            KlacStatus::BufferTooSmall,
            format!("{} rows do not fit in a buffer of {cap}", rows.len()),
        ));
    }
    if !rows.is_empty() && out.is_null() {
        return Err(null("rows"));
    }
    for (i, r) in rows.iter().enumerate() {
        out.add(i).write(r + 1);
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn klac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn klac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn klac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Minimum number of rows when every client may combine at most `k`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_lower_bound(t: u64, n: u64, k: u64, out: *mut u64) -> KlacStatus {
    guard(|| write(out, lower_bound_tk(t, n, k)?, "out"))
}

/// Builds the universal scheme for `(t, n, k)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_scheme_build(t: usize, n: u64, k: usize, out: *mut *mut KlacScheme) -> KlacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = build_scheme(t, n, k, None)?;
        write(out, Box::into_raw(Box::new(KlacScheme { inner })), "out")
    })
}

/// # Safety
/// `s` must come from [`klac_scheme_build`] or be null.
#[no_mangle]
pub unsafe extern "C" fn klac_scheme_free(s: *mut KlacScheme) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of transmitted rows; 0 for a null handle.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn klac_scheme_rows(s: *const KlacScheme) -> usize {
    s.as_ref().map_or(0, |s| s.inner.t_k())
}

/// Row `row` (0-based) of the scheme as a `0`/`1` string.
///
/// # Safety
/// `s` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_scheme_row(s: *const KlacScheme, row: usize, out: *mut *mut c_char) -> KlacStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scheme"))?;
        let p = s.inner.p();
        if row >= p.num_rows() {
            return Err(Fail(KlacStatus::InvalidInput, format!("row {row} out of range")));
        }
        write(out, owned_string(p.row(row).to_string()), "out")
    })
}

/// Rows (1-based) that add up to the vector given as a `0`/`1` string.
///
/// `len` receives the row count even when `cap` is too small.
///
/// # Safety
/// `s` must be a live handle, `vector` a nul-terminated string, `rows`
/// valid for `cap` writes and `len` valid for one.
#[no_mangle]
pub unsafe extern "C" fn klac_scheme_reconstruct(
    s: *const KlacScheme,
    vector: *const c_char,
    rows: *mut usize,
    cap: usize,
    len: *mut usize,
) -> KlacStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scheme"))?;
        let d: BitVector = read_str(vector, "vector")?.parse()?;
        write_rows(&s.inner.reconstruct(&d)?, rows, cap, len)
    })
}

/// Builds a scheme for the client vectors in `matrix` (one `0`/`1` row per
/// line). `node_budget` of 0 leaves the search unbounded.
///
/// # Safety
/// `matrix` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_graph_scheme_build(
    matrix: *const c_char,
    k: usize,
    method: KlacGraphMethod,
    node_budget: u64,
    out: *mut *mut KlacGraphScheme,
) -> KlacStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = BitMatrix::parse_text(read_str(matrix, "matrix")?)?;
        let inner = match method {
            KlacGraphMethod::Scr => scr_for_k(&d, k)?.scheme,
            KlacGraphMethod::BranchSearch => {
                let r = branch_pass(&d, k)?.candidates;
                let limits = SearchLimits {
                    node_budget: (node_budget > 0).then_some(node_budget),
                    ..SearchLimits::default()
                };
                search_min_subset(&r, &d, k, limits)?
                    .ok_or_else(|| Error::Infeasible("no subset of the candidates serves every client".into()))?
                    .scheme
            }
        };
        write(out, Box::into_raw(Box::new(KlacGraphScheme { inner })), "out")
    })
}

/// # Safety
/// `s` must come from [`klac_graph_scheme_build`] or be null.
#[no_mangle]
pub unsafe extern "C" fn klac_graph_scheme_free(s: *mut KlacGraphScheme) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of transmitted rows; 0 for a null handle.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn klac_graph_scheme_rows(s: *const KlacGraphScheme) -> usize {
    s.as_ref().map_or(0, |s| s.inner.size())
}

/// The transmitted rows in the matrix text format.
///
/// # Safety
/// `s` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_graph_scheme_matrix(s: *const KlacGraphScheme, out: *mut *mut c_char) -> KlacStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scheme"))?;
        write(out, owned_string(s.inner.p.to_text()), "out")
    })
}

/// Rows (1-based) assigned to `client` (0-based).
///
/// # Safety
/// As for [`klac_scheme_reconstruct`].
#[no_mangle]
pub unsafe extern "C" fn klac_graph_scheme_client_rows(
    s: *const KlacGraphScheme,
    client: usize,
    rows: *mut usize,
    cap: usize,
    len: *mut usize,
) -> KlacStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scheme"))?;
        if client >= s.inner.assignment.num_clients() {
            return Err(Fail(KlacStatus::InvalidInput, format!("client {client} out of range")));
        }
        write_rows(s.inner.assignment.rows(client), rows, cap, len)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn klac_privacy_report(
    m: usize,
    t: usize,
    k: usize,
    s: usize,
    out: *mut KlacPrivacyReport,
) -> KlacStatus {
    guard(|| {
        let r = klac::privacy::privacy_report(m, t, k, s)?;
        let report = KlacPrivacyReport {
            entropy_exact: r.entropy_exact,
            entropy_approx: r.entropy_approx,
            mil_upper_exact: r.mil_upper_exact,
            mil_upper_asymptotic: r.mil_upper_asymptotic,
            mil_conventional_lower: r.mil_conventional_lower,
        };
        write(out, report, "out")
    })
}
