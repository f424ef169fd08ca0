//! C ABI for `cycmzv`.
//!
//! Every function returns a [`CycmzvStatus`]; results come back through out
//! pointers. Objects are opaque handles released with their `_free`
//! function. Strings returned by the library are released with
//! [`cycmzv_string_free`]. After a failure, [`cycmzv_last_error`] describes
//! it on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cycmzv::arith::primes_in;
use cycmzv::cyclotomic::CycloElem;
use cycmzv::error::Error;
use cycmzv::finite::{verify_relation, Mode, Ring};
use cycmzv::hoffman::{HPoly, Index};
use cycmzv::numeric::{geometric_schedule, xi_approx};
use cycmzv::qseries::ZEvaluator;
use cycmzv::relations::{dimension_row, observed_dimension};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycmzvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    LevelMismatch = 4,
    DivisionByZero = 5,
    NotPrime = 6,
    PrimeExcluded = 7,
    NotConverged = 8,
    Internal = 9,
    Panic = 10,
}

/// Rings for [`cycmzv_verify_relation`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycmzvRing {
    /// Finite values: truncated sums mod p.
    A = 0,
    /// Cyclotomic values: z_p(k; ζ_p) mod (p).
    Acyc = 1,
}

/// An element of a cyclotomic field Q(ζ_n).
pub struct CycmzvElem(CycloElem);

/// A combination of indices with powers of ħ and rational coefficients.
pub struct CycmzvHPoly(HPoly);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CycmzvStatus {
    match e {
        Error::Parse(_) => CycmzvStatus::Parse,
        Error::LevelMismatch(..) => CycmzvStatus::LevelMismatch,
        Error::DivisionByZero => CycmzvStatus::DivisionByZero,
        Error::NotPrime(_) => CycmzvStatus::NotPrime,
        Error::PrimeExcluded { .. } => CycmzvStatus::PrimeExcluded,
        Error::Certificate(_) => CycmzvStatus::Internal,
        _ => CycmzvStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CycmzvStatus, String)>) -> CycmzvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CycmzvStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            CycmzvStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CycmzvStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CycmzvStatus, String) {
    (CycmzvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (CycmzvStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (CycmzvStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (CycmzvStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cycmzv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cycmzv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact value `z_n(k; ζ_n)` (or `z★` when `star`) for an index written as
/// `"k1,k2,..."`.
///
/// # Safety
/// `index` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_z_exact(
    index: *const c_char,
    n: u32,
    star: bool,
    out: *mut *mut CycmzvElem,
) -> CycmzvStatus {
    guard(|| {
        let k = Index::parse(read_str(index, "index")?).map_err(lib)?;
        if n == 0 {
            return Err((CycmzvStatus::InvalidArgument, "n must be positive".into()));
        }
        let mut ev = ZEvaluator::new(n);
        let v = if star { ev.z_star(&k) } else { ev.z(&k) };
        write_out(out, Box::into_raw(Box::new(CycmzvElem(v))), "out")
    })
}

/// Parses an element from its JSON form `{"n": N, "coeffs": ["p/q", ...]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_from_json(
    json: *const c_char,
    out: *mut *mut CycmzvElem,
) -> CycmzvStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| (CycmzvStatus::Parse, e.to_string()))?;
        let e = CycloElem::from_json_value(&v).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CycmzvElem(e))), "out")
    })
}

/// Releases an element. NULL is ignored.
///
/// # Safety
/// `e` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_free(e: *mut CycmzvElem) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Level `n` of the field containing `e`.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_level(e: *const CycmzvElem, out: *mut u32) -> CycmzvStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("elem"))?;
        write_out(out, e.0.level(), "out")
    })
}

/// JSON form of `e`; release with [`cycmzv_string_free`].
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_to_json(
    e: *const CycmzvElem,
    out: *mut *mut c_char,
) -> CycmzvStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("elem"))?;
        write_out(out, to_c_string(e.0.to_json_value().to_string()), "out")
    })
}

/// Exact equality.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_equal(
    a: *const CycmzvElem,
    b: *const CycmzvElem,
    out: *mut bool,
) -> CycmzvStatus {
    guard(|| {
        let a = a.as_ref().ok_or_else(|| null("a"))?;
        let b = b.as_ref().ok_or_else(|| null("b"))?;
        write_out(out, a.0 == b.0, "out")
    })
}

/// Binary operations for [`cycmzv_elem_binop`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycmzvOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    Div = 3,
}

/// `a op b` in the same field; fails with `LEVEL_MISMATCH` otherwise.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_binop(
    a: *const CycmzvElem,
    op: CycmzvOp,
    b: *const CycmzvElem,
    out: *mut *mut CycmzvElem,
) -> CycmzvStatus {
    guard(|| {
        let a = &a.as_ref().ok_or_else(|| null("a"))?.0;
        let b = &b.as_ref().ok_or_else(|| null("b"))?.0;
        let r = match op {
            CycmzvOp::Add => a.checked_add(b),
            CycmzvOp::Sub => a.checked_sub(b),
            CycmzvOp::Mul => a.checked_mul(b),
            CycmzvOp::Div => a.checked_div(b),
        }
        .map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CycmzvElem(r))), "out")
    })
}

/// Complex value of `e` under `ζ_n ↦ e^{2πi·exponent/n}`, computed with
/// `precision` bits and returned as doubles.
///
/// # Safety
/// `e` must be a live handle; `re`, `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_elem_embed(
    e: *const CycmzvElem,
    exponent: i64,
    precision: usize,
    re: *mut f64,
    im: *mut f64,
) -> CycmzvStatus {
    guard(|| {
        let e = e.as_ref().ok_or_else(|| null("elem"))?;
        let c = e.0.embed_complex(exponent, precision).map_err(lib)?.to_c64();
        write_out(re, c.re, "re")?;
        write_out(im, c.im, "im")
    })
}

/// Parses a combination from JSON: a list of
/// `{"index": "k1,k2", "hbar": d, "coeff": "p/q"}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_hpoly_from_json(
    json: *const c_char,
    out: *mut *mut CycmzvHPoly,
) -> CycmzvStatus {
    guard(|| {
        let w = HPoly::from_json_str(read_str(json, "json")?).map_err(lib)?;
        write_out(out, Box::into_raw(Box::new(CycmzvHPoly(w))), "out")
    })
}

/// Releases a combination. NULL is ignored.
///
/// # Safety
/// `w` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_hpoly_free(w: *mut CycmzvHPoly) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Human-readable form, e.g. `e(4,1) - 2*e(3,1,1)`.
///
/// # Safety
/// `w` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_hpoly_to_string(
    w: *const CycmzvHPoly,
    out: *mut *mut c_char,
) -> CycmzvStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("hpoly"))?;
        write_out(out, to_c_string(w.0.to_string()), "out")
    })
}

/// Evaluates `w` at every prime in `[lo, hi]` and sets `holds` when it
/// vanishes at all non-excluded primes. When `report` is non-NULL it
/// receives the per-prime JSON report (release with
/// [`cycmzv_string_free`]).
///
/// # Safety
/// `w` must be a live handle; `holds` must be writable; `report` may be
/// NULL.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_verify_relation(
    w: *const CycmzvHPoly,
    ring: CycmzvRing,
    star: bool,
    lo: u64,
    hi: u64,
    holds: *mut bool,
    report: *mut *mut c_char,
) -> CycmzvStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("hpoly"))?;
        let ring = match ring {
            CycmzvRing::A => Ring::A,
            CycmzvRing::Acyc => Ring::Acyc,
        };
        let mode = if star { Mode::Star } else { Mode::Plain };
        let r = verify_relation(&w.0, ring, &primes_in(lo, hi), mode).map_err(lib)?;
        write_out(holds, r.holds(), "holds")?;
        if !report.is_null() {
            report.write(to_c_string(r.to_json_value().to_string()));
        }
        Ok(())
    })
}

/// Upper bound for the dimension of the weight-`k` value space.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_dimension_bound(k: u32, out: *mut usize) -> CycmzvStatus {
    guard(|| {
        let row = dimension_row(k).map_err(lib)?;
        write_out(out, row.upper_bound, "out")
    })
}

/// `dim_Q` of the span of the exact values `z_p(k; ζ_p)` of weight `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_observed_dimension(k: u32, p: u32, out: *mut usize) -> CycmzvStatus {
    guard(|| {
        let d = observed_dimension(k, p).map_err(lib)?;
        write_out(out, d, "out")
    })
}

/// Limit estimate of `z_n(k; e^{2πi/n})` as `n → ∞` over the geometric
/// schedule `start, start·factor, …` (`count` levels). Returns
/// `NOT_CONVERGED` with the outputs filled in when the error bar does not
/// shrink.
///
/// # Safety
/// `index` must be a nul-terminated string; `re`, `im`, `error_bar` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cycmzv_limit(
    index: *const c_char,
    start: u32,
    factor: u32,
    count: u32,
    precision: usize,
    star: bool,
    re: *mut f64,
    im: *mut f64,
    error_bar: *mut f64,
) -> CycmzvStatus {
    let mut converged = true;
    let st = guard(|| {
        let k = Index::parse(read_str(index, "index")?).map_err(lib)?;
        let schedule = geometric_schedule(&format!("{start}:{factor}:{count}")).map_err(lib)?;
        let est = xi_approx(&k, &schedule, precision, star).map_err(lib)?;
        write_out(re, est.value.re, "re")?;
        write_out(im, est.value.im, "im")?;
        write_out(error_bar, est.error_bar, "error_bar")?;
        converged = est.converged;
        Ok(())
    });
    if st == CycmzvStatus::Ok && !converged {
        set_error("error bar did not shrink along the schedule".into());
        return CycmzvStatus::NotConverged;
    }
    st
}
