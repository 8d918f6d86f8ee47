//! C ABI over the `signcone` library.
//!
//! Problems are loaded once into an opaque [`SignconeProblem`] handle and
//! queried through functions that hand back JSON reports as heap strings.
//! Every call returns a [`SignconeStatus`]; on failure the message is
//! available from [`signcone_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use signcone::certify::{certify, report::compute_constants};
use signcone::cli::solve_loaded;
use signcone::config::{load_problem, parse_problem, LoadedProblem};
use signcone::Error;

/// Status codes. The first four match the exit codes of the command line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignconeStatus {
    Ok = 0,
    Validation = 1,
    Numeric = 2,
    Internal = 3,
    NullPointer = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque handle to a validated problem.
pub struct SignconeProblem {
    inner: LoadedProblem,
}

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

fn status_of(e: &Error) -> SignconeStatus {
    match e.exit_code() {
        1 => SignconeStatus::Validation,
        2 => SignconeStatus::Numeric,
        _ => SignconeStatus::Internal,
    }
}

fn guard<F: FnOnce() -> Result<(), (SignconeStatus, String)>>(f: F) -> SignconeStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SignconeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside signcone".into());
            SignconeStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SignconeStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SignconeStatus, String)> {
    if p.is_null() {
        return Err((SignconeStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller passes a NUL-terminated string that outlives the call.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| (SignconeStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_json<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> Result<(), (SignconeStatus, String)> {
    let json = serde_json::to_string_pretty(value).map_err(|e| lib_err(e.into()))?;
    let c = CString::new(json).map_err(|_| (SignconeStatus::Internal, "report contains NUL".to_string()))?;
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = c.into_raw() };
    Ok(())
}

unsafe fn handle<'a>(p: *const SignconeProblem) -> Result<&'a LoadedProblem, (SignconeStatus, String)> {
    if p.is_null() {
        return Err((SignconeStatus::NullPointer, "problem handle is null".into()));
    }
    // SAFETY: non-null handles come from `signcone_problem_*` constructors.
    Ok(unsafe { &(*p).inner })
}

unsafe fn load_into(
    out: *mut *mut SignconeProblem,
    f: impl FnOnce() -> Result<LoadedProblem, (SignconeStatus, String)>,
) -> SignconeStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return SignconeStatus::NullPointer;
    }
    // SAFETY: checked non-null above.
    unsafe { *out = ptr::null_mut() };
    guard(|| {
        let inner = f()?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(SignconeProblem { inner })) };
        Ok(())
    })
}

/// Parses and validates a problem given as JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signcone_problem_from_json(
    json: *const c_char,
    out: *mut *mut SignconeProblem,
) -> SignconeStatus {
    unsafe { load_into(out, || parse_problem(read_str(json, "json")?).map_err(lib_err)) }
}

/// Loads and validates a problem file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn signcone_problem_from_file(
    path: *const c_char,
    out: *mut *mut SignconeProblem,
) -> SignconeStatus {
    unsafe { load_into(out, || load_problem(Path::new(read_str(path, "path")?)).map_err(lib_err)) }
}

/// Releases a handle. Null is accepted.
///
/// # Safety
/// `problem` must come from a `signcone_problem_from_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn signcone_problem_free(problem: *mut SignconeProblem) {
    if !problem.is_null() {
        // SAFETY: handle was created by Box::into_raw.
        drop(unsafe { Box::from_raw(problem) });
    }
}

unsafe fn query(
    problem: *const SignconeProblem,
    out: *mut *mut c_char,
    f: impl FnOnce(&LoadedProblem, *mut *mut c_char) -> Result<(), (SignconeStatus, String)>,
) -> SignconeStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return SignconeStatus::NullPointer;
    }
    // SAFETY: checked non-null above.
    unsafe { *out = ptr::null_mut() };
    guard(|| f(unsafe { handle(problem)? }, out))
}

/// Writes the constants report (c, m, refined m, M) as JSON into `*out`.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable. Free the result
/// with [`signcone_string_free`].
#[no_mangle]
pub unsafe extern "C" fn signcone_constants_json(
    problem: *const SignconeProblem,
    out: *mut *mut c_char,
) -> SignconeStatus {
    unsafe {
        query(problem, out, |l, out| {
            let c = compute_constants(&l.problem, &l.settings).map_err(lib_err)?;
            write_json(&c, out)
        })
    }
}

/// Writes the full certificate report as JSON into `*out`.
///
/// # Safety
/// As for [`signcone_constants_json`].
#[no_mangle]
pub unsafe extern "C" fn signcone_certify_json(
    problem: *const SignconeProblem,
    out: *mut *mut c_char,
) -> SignconeStatus {
    unsafe {
        query(problem, out, |l, out| {
            let rep = certify(&l.problem, &l.ladder, l.eigen.as_ref(), &l.settings).map_err(lib_err)?;
            write_json(&rep, out)
        })
    }
}

/// Runs the multistart solver and writes its report as JSON into `*out`.
///
/// # Safety
/// As for [`signcone_constants_json`].
#[no_mangle]
pub unsafe extern "C" fn signcone_solve_json(problem: *const SignconeProblem, out: *mut *mut c_char) -> SignconeStatus {
    unsafe {
        query(problem, out, |l, out| {
            let rep = solve_loaded(l).map_err(lib_err)?;
            write_json(&rep, out)
        })
    }
}

/// Frees a string returned by this library. Null is accepted.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn signcone_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn signcone_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn signcone_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
