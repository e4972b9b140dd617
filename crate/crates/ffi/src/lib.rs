//! C ABI over `intcone`.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns an [`IcStatus`]; on failure the message is
//! available from [`ic_last_error`] on the same thread. Strings handed out
//! by the library are NUL-terminated UTF-8 and must be released with
//! [`ic_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intcone::json;
use intcone::linalg::{det, SymIntMatrix};
use intcone::psd::{self, Rank1Certificate};
use intcone::soc::{self, ConePoint, SocCertificate};
use intcone::Error;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcStatus {
    Ok = 0,
    NullPointer = 1,
    Malformed = 2,
    NotPsd = 3,
    NotInCone = 4,
    Domain = 5,
    Overflow = 6,
    Panic = 7,
}

/// A symmetric integer matrix.
pub struct IcMatrix(SymIntMatrix);

/// An integer point of the second-order cone.
pub struct IcPoint(ConePoint);

/// A rank-1 decomposition together with the matrix it decomposes.
pub struct IcPsdCertificate {
    matrix: SymIntMatrix,
    cert: Rank1Certificate,
}

/// An SOC decomposition together with the point it decomposes.
pub struct IcSocCertificate {
    point: ConePoint,
    cert: SocCertificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> IcStatus {
    match e {
        Error::NotPsd | Error::NotPositiveDefinite => IcStatus::NotPsd,
        Error::NotInCone => IcStatus::NotInCone,
        Error::NotSymmetric { .. } | Error::MalformedMatrix(_) => IcStatus::Malformed,
        Error::OutOfRange(_) => IcStatus::Overflow,
        _ => IcStatus::Domain,
    }
}

fn fail(status: IcStatus, msg: impl Into<String>) -> IcStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> IcStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, converting panics into [`IcStatus::Panic`].
fn guard(f: impl FnOnce() -> IcStatus) -> IcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(IcStatus::Panic, "internal panic"),
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, IcStatus> {
    if s.is_null() {
        return Err(fail(IcStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(IcStatus::Malformed, "string is not UTF-8"))
}

fn out_string(s: String, out: *mut *mut c_char) -> IcStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null before reaching here.
            unsafe { *out = c.into_raw() };
            IcStatus::Ok
        }
        Err(_) => fail(IcStatus::Panic, "string contains NUL"),
    }
}

fn parse_json(text: &str) -> Result<serde_json::Value, IcStatus> {
    serde_json::from_str(text).map_err(|e| fail(IcStatus::Malformed, e.to_string()))
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(IcStatus::NullPointer, concat!("null argument: ", stringify!($p)));
        })+
    };
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds an n×n matrix from `n*n` row-major entries; fails unless symmetric.
///
/// # Safety
/// `entries` must point to `n*n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ic_matrix_new(
    n: usize,
    entries: *const i64,
    out: *mut *mut IcMatrix,
) -> IcStatus {
    nonnull!(out);
    if n > 0 {
        nonnull!(entries);
    }
    guard(|| {
        let data = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(entries, n * n)
        };
        let rows: Vec<Vec<BigInt>> = data
            .chunks(n.max(1))
            .take(n)
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        match SymIntMatrix::from_rows(rows) {
            Ok(m) => {
                *out = boxed(IcMatrix(m));
                IcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses `{"n": int, "rows": [[int,...],...]}`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ic_matrix_from_json(
    text: *const c_char,
    out: *mut *mut IcMatrix,
) -> IcStatus {
    nonnull!(out);
    guard(|| {
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let v = match parse_json(text) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match json::matrix_from_json(&v) {
            Ok(m) => {
                *out = boxed(IcMatrix(m));
                IcStatus::Ok
            }
            Err(e) => fail(IcStatus::Malformed, e.to_string()),
        }
    })
}

/// # Safety
/// `m` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ic_matrix_free(m: *mut IcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_matrix_dim(m: *const IcMatrix) -> usize {
    if m.is_null() {
        return 0;
    }
    (*m).0.dim()
}

/// Determinant, if it fits in 64 bits.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_matrix_det(m: *const IcMatrix, out: *mut i64) -> IcStatus {
    nonnull!(m, out);
    guard(|| match det(&(*m).0).to_i64() {
        Some(d) => {
            *out = d;
            IcStatus::Ok
        }
        None => fail(IcStatus::Overflow, "determinant does not fit in 64 bits"),
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_is_sporadic(m: *const IcMatrix, out: *mut bool) -> IcStatus {
    nonnull!(m, out);
    guard(|| match psd::is_sporadic(&(*m).0) {
        Ok(b) => {
            *out = b;
            IcStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_decompose(
    m: *const IcMatrix,
    out: *mut *mut IcPsdCertificate,
) -> IcStatus {
    nonnull!(m, out);
    guard(|| {
        let x = (*m).0.clone();
        match psd::decompose(&x) {
            Ok(cert) => {
                *out = boxed(IcPsdCertificate { matrix: x, cert });
                IcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of rank-1 terms (without multiplicity).
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_certificate_terms(c: *const IcPsdCertificate) -> usize {
    if c.is_null() {
        return 0;
    }
    (*c).cert.vectors.len()
}

/// Whether the decomposition left a sporadic remainder.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_certificate_has_remainder(c: *const IcPsdCertificate) -> bool {
    !c.is_null() && (*c).cert.remainder.is_some()
}

/// Re-checks the certificate against the matrix it was built from.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_certificate_verify(c: *const IcPsdCertificate) -> IcStatus {
    nonnull!(c);
    guard(|| match (*c).cert.verify(&(*c).matrix) {
        Ok(()) => IcStatus::Ok,
        Err(e) => fail(IcStatus::Domain, e.to_string()),
    })
}

/// Certificate as JSON; release with [`ic_string_free`].
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_certificate_to_json(
    c: *const IcPsdCertificate,
    out: *mut *mut c_char,
) -> IcStatus {
    nonnull!(c, out);
    guard(|| out_string(json::rank1_certificate_to_json(&(*c).cert).to_string(), out))
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_psd_certificate_free(c: *mut IcPsdCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `coords` must point to `n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ic_point_new(
    n: usize,
    coords: *const i64,
    out: *mut *mut IcPoint,
) -> IcStatus {
    nonnull!(coords, out);
    guard(
        || match ConePoint::new(std::slice::from_raw_parts(coords, n).to_vec()) {
            Ok(p) => {
                *out = boxed(IcPoint(p));
                IcStatus::Ok
            }
            Err(e) => from_error(e),
        },
    )
}

/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_point_free(p: *mut IcPoint) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_is_sporadic(p: *const IcPoint, out: *mut bool) -> IcStatus {
    nonnull!(p, out);
    guard(|| match soc::is_sporadic_soc(&(*p).0) {
        Ok(b) => {
            *out = b;
            IcStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_decompose(
    p: *const IcPoint,
    minimal_roots: bool,
    out: *mut *mut IcSocCertificate,
) -> IcStatus {
    nonnull!(p, out);
    guard(|| {
        let s = (*p).0.clone();
        match soc::decompose_soc(&s, minimal_roots) {
            Ok(cert) => {
                *out = boxed(IcSocCertificate { point: s, cert });
                IcStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of terms λ·(w·r).
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_certificate_terms(c: *const IcSocCertificate) -> usize {
    if c.is_null() {
        return 0;
    }
    (*c).cert.terms.len()
}

/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_certificate_verify(c: *const IcSocCertificate) -> IcStatus {
    nonnull!(c);
    guard(|| match (*c).cert.verify(&(*c).point) {
        Ok(()) => IcStatus::Ok,
        Err(e) => fail(IcStatus::Domain, e.to_string()),
    })
}

/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_certificate_to_json(
    c: *const IcSocCertificate,
    out: *mut *mut c_char,
) -> IcStatus {
    nonnull!(c, out);
    guard(|| out_string(json::soc_certificate_to_json(&(*c).cert).to_string(), out))
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_certificate_free(c: *mut IcSocCertificate) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// The roots of T_n as a JSON array of coordinate arrays.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ic_soc_roots_json(n: usize, out: *mut *mut c_char) -> IcStatus {
    nonnull!(out);
    guard(|| match soc::roots(n) {
        Ok(rs) => {
            let v: Vec<&[i64]> = rs.iter().map(ConePoint::coords).collect();
            out_string(serde_json::to_string(&v).expect("integers serialize"), out)
        }
        Err(e) => from_error(e),
    })
}
