//! C ABI over `uniformity-lab`.
//!
//! Functions and local functions are opaque heap handles created by
//! `ul_*_new`-style calls and released with the matching `*_free`. Every
//! entry point returns a [`UlStatus`]; on failure a message is available from
//! [`ul_last_error`] on the same thread until the next failing call. Panics
//! never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;
use uniformity_lab::counting::{count_configs, dual_function, lambda, CountingParams};
use uniformity_lab::diophantine::best_denominator;
use uniformity_lab::fourier::Frequency;
use uniformity_lab::funcspace::{indicator, FiniteFunction, Interval};
use uniformity_lab::gowers::{gowers_norm, gowers_norm_on_class, GowersDegree};
use uniformity_lab::localfn::{extract_correlating_local, ExtractionConfig, LocalFunction};
use uniformity_lab::search::{max_free_set_exact, YMode};
use uniformity_lab::Error;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UlStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    /// Numerical failure or non-convergence.
    Numerical = 3,
    Io = 4,
    /// The extraction ran but produced no local function.
    ExtractionFailed = 5,
    /// An internal panic was caught.
    Panic = 6,
}

/// A finitely supported function `Z -> C`.
pub struct UlFunction(FiniteFunction);

/// A local function with a fixed resolution, modulus and anchor.
pub struct UlLocalFunction(LocalFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior NULs removed"));
}

fn status_of(err: &Error) -> UlStatus {
    match err {
        Error::Io { .. } | Error::Json { .. } => UlStatus::Io,
        Error::Numerical(_) | Error::NonConvergence { .. } => UlStatus::Numerical,
        Error::Extraction { .. } => UlStatus::ExtractionFailed,
        _ => UlStatus::InvalidArgument,
    }
}

struct Fail(UlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(UlStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: impl Into<String>) -> Fail {
    Fail(UlStatus::InvalidArgument, msg.into())
}

/// Runs `body`, recording any failure and containing panics.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> UlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => UlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UlStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn params(q: u64, n: u64) -> Result<CountingParams, Fail> {
    Ok(CountingParams::new(q, n)?)
}

/// Message for the last failing call on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ul_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a function from `len` values starting at `offset`. `im` may be
/// null for a real function.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn ul_function_new(
    offset: i64,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut UlFunction,
) -> UlStatus {
    guard(|| {
        if len > 0 && re.is_null() {
            return Err(null("re"));
        }
        let values: Vec<Complex64> = (0..len)
            .map(|i| {
                let b = if im.is_null() { 0.0 } else { *im.add(i) };
                Complex64::new(*re.add(i), b)
            })
            .collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(bad("values must be finite"));
        }
        write(out, boxed(UlFunction(FiniteFunction::new(offset, values))), "out")
    })
}

/// The indicator of `[lo, hi)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ul_function_indicator(lo: i64, hi: i64, out: *mut *mut UlFunction) -> UlStatus {
    guard(|| {
        let iv = Interval::new(lo, hi)?;
        write(out, boxed(UlFunction(indicator(iv))), "out")
    })
}

/// Reads a function file `[{"x": .., "re": .., "im": ..}, ...]`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ul_function_from_json_file(path: *const c_char, out: *mut *mut UlFunction) -> UlStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| bad("path is not UTF-8"))?;
        let f = uniformity_lab::io::read_function(Path::new(path))?;
        write(out, boxed(UlFunction(f)), "out")
    })
}

/// Releases a function; null is ignored.
///
/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ul_function_free(f: *mut UlFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Length of the stored window.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_function_len(f: *const UlFunction, out: *mut usize) -> UlStatus {
    guard(|| write(out, deref(f, "f")?.0.len(), "out"))
}

/// First point of the stored window.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_function_offset(f: *const UlFunction, out: *mut i64) -> UlStatus {
    guard(|| write(out, deref(f, "f")?.0.offset(), "out"))
}

/// `f(x)`, zero outside the window.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_function_eval(f: *const UlFunction, x: i64, re: *mut f64, im: *mut f64) -> UlStatus {
    guard(|| {
        let v = deref(f, "f")?.0.at(x);
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}

/// `‖f‖_{U^s}` for `1 <= s <= 6`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_gowers_norm(f: *const UlFunction, s: u32, out: *mut f64) -> UlStatus {
    guard(|| {
        let f = deref(f, "f")?;
        write(out, gowers_norm(&f.0, GowersDegree::new(s)?), "out")
    })
}

/// `‖x -> f(u + qx)‖_{U^s}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_gowers_norm_on_class(
    f: *const UlFunction,
    u: i64,
    q: u64,
    s: u32,
    out: *mut f64,
) -> UlStatus {
    guard(|| {
        let f = deref(f, "f")?;
        write(out, gowers_norm_on_class(&f.0, u, q, GowersDegree::new(s)?)?, "out")
    })
}

/// `Λ_{q,N}(f₀, f₁, f₂)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_lambda(
    q: u64,
    n: u64,
    f0: *const UlFunction,
    f1: *const UlFunction,
    f2: *const UlFunction,
    re: *mut f64,
    im: *mut f64,
) -> UlStatus {
    guard(|| {
        let p = params(q, n)?;
        let v = lambda(&p, &deref(f0, "f0")?.0, &deref(f1, "f1")?.0, &deref(f2, "f2")?.0);
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}

/// The dual function `E_y f₀(x - qy²) f₁(x + y - qy²)` as a new handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_dual_function(
    q: u64,
    n: u64,
    f0: *const UlFunction,
    f1: *const UlFunction,
    out: *mut *mut UlFunction,
) -> UlStatus {
    guard(|| {
        let p = params(q, n)?;
        let d = dual_function(&p, &deref(f0, "f0")?.0, &deref(f1, "f1")?.0);
        write(out, boxed(UlFunction(d)), "out")
    })
}

/// Number of configurations `x, x + y, x + qy²` with `y ∈ [M]` inside the set.
///
/// # Safety
/// `set` must point to `len` readable integers.
#[no_mangle]
pub unsafe extern "C" fn ul_count_configs(q: u64, n: u64, set: *const i64, len: usize, out: *mut u64) -> UlStatus {
    guard(|| {
        if len > 0 && set.is_null() {
            return Err(null("set"));
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(set, len) };
        write(out, count_configs(slice, &params(q, n)?)?, "out")
    })
}

/// Exact maximum of a configuration-free subset of `[N]` (`N <= 40`). The
/// lexicographically least optimum is written to `set`, which must have room
/// for `capacity >= N` entries.
///
/// # Safety
/// `set` must point to `capacity` writable integers.
#[no_mangle]
pub unsafe extern "C" fn ul_max_free_set(
    q: u64,
    n: u64,
    unbounded: bool,
    set: *mut i64,
    capacity: usize,
    out_size: *mut usize,
) -> UlStatus {
    guard(|| {
        let mode = if unbounded { YMode::Unbounded } else { YMode::Bounded };
        let (size, members) = max_free_set_exact(&params(q, n)?, mode)?;
        if !set.is_null() {
            if capacity < size {
                return Err(bad(format!("capacity {capacity} is below the set size {size}")));
            }
            std::ptr::copy_nonoverlapping(members.as_ptr(), set, size);
        }
        write(out_size, size, "out_size")
    })
}

/// The `q' ∈ [1, Q]` minimising `‖q' α‖`, with `a` the nearest integer to
/// `q' α` and `err = ‖q' α‖`.
///
/// # Safety
/// Output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_best_denominator(
    alpha: f64,
    q_max: u64,
    out_q: *mut u64,
    out_a: *mut i64,
    out_err: *mut f64,
) -> UlStatus {
    guard(|| {
        if !alpha.is_finite() {
            return Err(bad("alpha must be finite"));
        }
        let r = best_denominator(Frequency::new(alpha), q_max)?;
        write(out_q, r.denominator, "out_q")?;
        write(out_a, r.numerator, "out_a")?;
        write(out_err, r.err, "out_err")
    })
}

/// Extracts a local function correlating with `f` given `|Λ(g₀, g₁, f)| >= δ`,
/// using the default thresholds. `correlation` receives `|Σ f φ|`, also when
/// the extraction fails.
///
/// # Safety
/// Pointers must be valid; `correlation` may be null.
#[no_mangle]
pub unsafe extern "C" fn ul_extract_correlating_local(
    q: u64,
    n: u64,
    delta: f64,
    f: *const UlFunction,
    g0: *const UlFunction,
    g1: *const UlFunction,
    out: *mut *mut UlLocalFunction,
    correlation: *mut f64,
) -> UlStatus {
    guard(|| {
        let p = params(q, n)?;
        let res = extract_correlating_local(
            &p,
            &deref(f, "f")?.0,
            &deref(g0, "g0")?.0,
            &deref(g1, "g1")?.0,
            delta,
            &ExtractionConfig::default(),
        );
        match res {
            Ok(ex) => {
                if !correlation.is_null() {
                    correlation.write(ex.correlation.norm());
                }
                write(out, boxed(UlLocalFunction(ex.local)), "out")
            }
            Err(fail) => {
                if !correlation.is_null() {
                    correlation.write(fail.correlation);
                }
                Err(Fail(
                    UlStatus::ExtractionFailed,
                    format!("extraction failed at the {} stage: {}", fail.stage, fail.message),
                ))
            }
        }
    })
}

/// Releases a local function; null is ignored.
///
/// # Safety
/// `phi` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ul_local_function_free(phi: *mut UlLocalFunction) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// `φ(x)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_local_function_eval(
    phi: *const UlLocalFunction,
    x: i64,
    re: *mut f64,
    im: *mut f64,
) -> UlStatus {
    guard(|| {
        let v = deref(phi, "phi")?.0.eval(x);
        write(re, v.re, "re")?;
        write(im, v.im, "im")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_local_function_modulus(phi: *const UlLocalFunction, out: *mut u64) -> UlStatus {
    guard(|| write(out, deref(phi, "phi")?.0.modulus(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ul_local_function_resolution(phi: *const UlLocalFunction, out: *mut u64) -> UlStatus {
    guard(|| write(out, deref(phi, "phi")?.0.resolution(), "out"))
}
