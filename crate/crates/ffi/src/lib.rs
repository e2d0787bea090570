//! C ABI over `relpow`.
//!
//! Matrices cross the boundary as row-major arrays of interleaved `(re, im)` doubles,
//! `2 n n` values for an `n x n` matrix, which matches C99 `double complex[n][n]`.
//! Every call returns a [`RelpowStatus`]; on failure [`relpow_last_error`] describes it.

use relpow::error::Error;
use relpow::instance::Instance;
use relpow::linalg::{c, CMat};
use relpow::linrel::LinearRelation;
use relpow::powers::{neg_power, PowerSpec, Route};
use relpow::resolvent::c_resolvent;
use relpow::semigroup::evaluate_sg;
use relpow::verify::{verify_identity, VerifyOptions};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelpowStatus {
    Ok = 0,
    NullPointer = 1,
    DimensionMismatch = 2,
    NotInResolventSet = 3,
    ToleranceNotMet = 4,
    InvalidParams = 5,
    RouteDomain = 6,
    OutOfSector = 7,
    Parse = 8,
    Io = 9,
    UnknownIdentity = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelpowRoute {
    Contour = 0,
    Balakrishnan = 1,
    Moment = 2,
}

/// Opaque linear relation.
pub struct RelpowRelation(LinearRelation);

/// Opaque problem instance: relation, regularizer and region.
pub struct RelpowInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> RelpowStatus {
    match e {
        Error::DimensionMismatch(_) => RelpowStatus::DimensionMismatch,
        Error::NotInResolventSet { .. } => RelpowStatus::NotInResolventSet,
        Error::ToleranceNotMet { .. } => RelpowStatus::ToleranceNotMet,
        Error::InvalidParams(_) | Error::TailBoundMissing => RelpowStatus::InvalidParams,
        Error::RouteDomain(_) => RelpowStatus::RouteDomain,
        Error::OutOfSector { .. } => RelpowStatus::OutOfSector,
        Error::Parse(_) => RelpowStatus::Parse,
        Error::Io(_) => RelpowStatus::Io,
        Error::UnknownIdentity(_) => RelpowStatus::UnknownIdentity,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), RelpowStatus>) -> RelpowStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RelpowStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RelpowStatus::Panic
        }
    }
}

fn lib<T>(r: relpow::error::Result<T>) -> Result<T, RelpowStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> RelpowStatus {
    set_error(format!("{what} is null"));
    RelpowStatus::NullPointer
}

unsafe fn read_matrix(p: *const f64, n: usize, what: &str) -> Result<CMat, RelpowStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = std::slice::from_raw_parts(p, 2 * n * n);
    Ok(CMat::from_fn(n, n, |i, j| c(s[2 * (i * n + j)], s[2 * (i * n + j) + 1])))
}

unsafe fn write_matrix(m: &CMat, out: *mut f64) -> Result<(), RelpowStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    let (r, k) = m.shape();
    let s = std::slice::from_raw_parts_mut(out, 2 * r * k);
    for i in 0..r {
        for j in 0..k {
            s[2 * (i * k + j)] = m[(i, j)].re;
            s[2 * (i * k + j) + 1] = m[(i, j)].im;
        }
    }
    Ok(())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, RelpowStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        set_error(format!("{what}: {e}"));
        RelpowStatus::Parse
    })
}

unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), RelpowStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, RelpowStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn relpow_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Relation given by the graph of an `n x n` matrix.
///
/// # Safety
/// `a` must hold `2 n n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_relation_from_matrix(
    n: usize,
    a: *const f64,
    out: *mut *mut RelpowRelation,
) -> RelpowStatus {
    guard(|| {
        let m = read_matrix(a, n, "a")?;
        put(out, RelpowRelation(lib(LinearRelation::from_matrix(&m))?))
    })
}

/// Relation `{(B x, L x)}`.
///
/// # Safety
/// `b` and `l` must each hold `2 n n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_relation_from_pencil(
    n: usize,
    b: *const f64,
    l: *const f64,
    out: *mut *mut RelpowRelation,
) -> RelpowStatus {
    guard(|| {
        let (bm, lm) = (read_matrix(b, n, "b")?, read_matrix(l, n, "l")?);
        put(out, RelpowRelation(lib(LinearRelation::from_pencil(&bm, &lm))?))
    })
}

/// # Safety
/// `rel` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_relation_dim(rel: *const RelpowRelation, out: *mut usize) -> RelpowStatus {
    guard(|| {
        let r = get(rel, "rel")?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.0.dim();
        Ok(())
    })
}

/// # Safety
/// `rel` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn relpow_relation_free(rel: *mut RelpowRelation) {
    if !rel.is_null() {
        drop(Box::from_raw(rel));
    }
}

/// `(λ - A)^{-1} C`; a null `c` means the identity.
///
/// # Safety
/// `c`, when given, and `out` must hold `2 n n` doubles.
#[no_mangle]
pub unsafe extern "C" fn relpow_c_resolvent(
    rel: *const RelpowRelation,
    c_mat: *const f64,
    lambda_re: f64,
    lambda_im: f64,
    out: *mut f64,
) -> RelpowStatus {
    guard(|| {
        let a = &get(rel, "rel")?.0;
        let n = a.dim();
        let cm = if c_mat.is_null() { CMat::identity(n, n) } else { read_matrix(c_mat, n, "c")? };
        write_matrix(&lib(c_resolvent(a, &cm, c(lambda_re, lambda_im)))?, out)
    })
}

/// Instance from a JSON problem file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_instance_load(path: *const c_char, out: *mut *mut RelpowInstance) -> RelpowStatus {
    guard(|| {
        let p = read_str(path, "path")?;
        put(out, RelpowInstance(lib(Instance::load(std::path::Path::new(p)))?))
    })
}

/// Instance from JSON text in the problem file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_instance_from_json(json: *const c_char, out: *mut *mut RelpowInstance) -> RelpowStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        put(out, RelpowInstance(lib(Instance::from_json(text))?))
    })
}

/// # Safety
/// `inst` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_instance_dim(inst: *const RelpowInstance, out: *mut usize) -> RelpowStatus {
    guard(|| {
        let i = get(inst, "inst")?;
        *out.as_mut().ok_or_else(|| null("out"))? = i.0.dim();
        Ok(())
    })
}

/// # Safety
/// `inst` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn relpow_instance_free(inst: *mut RelpowInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// `(-A)^{-b}_{C1}` by `route`, a [`RelpowRoute`] value; `n_moment` is only read by the moment route.
///
/// # Safety
/// `out` must hold `2 n n` doubles.
#[no_mangle]
pub unsafe extern "C" fn relpow_neg_power(
    inst: *const RelpowInstance,
    b_re: f64,
    b_im: f64,
    route: u32,
    n_moment: usize,
    tol: f64,
    out: *mut f64,
) -> RelpowStatus {
    guard(|| {
        let i = &get(inst, "inst")?.0;
        let b = c(b_re, b_im);
        let spec = match route {
            r if r == RelpowRoute::Contour as u32 => PowerSpec::new(b, Route::Contour),
            r if r == RelpowRoute::Balakrishnan as u32 => PowerSpec::new(b, Route::Balakrishnan),
            r if r == RelpowRoute::Moment as u32 => PowerSpec::moment(b, n_moment),
            r => {
                set_error(format!("unknown route {r}"));
                return Err(RelpowStatus::InvalidParams);
            }
        };
        write_matrix(&lib(neg_power(&i.a, &i.c1, &spec, &i.region, tol))?, out)
    })
}

/// `S_γ(t)` for `0 < γ <= 1/2`.
///
/// # Safety
/// `out` must hold `2 n n` doubles.
#[no_mangle]
pub unsafe extern "C" fn relpow_semigroup(
    inst: *const RelpowInstance,
    gamma: f64,
    t_re: f64,
    t_im: f64,
    tol: f64,
    out: *mut f64,
) -> RelpowStatus {
    guard(|| {
        let i = &get(inst, "inst")?.0;
        write_matrix(&lib(evaluate_sg(&i.a, &i.c1, gamma, c(t_re, t_im), &i.region, tol))?, out)
    })
}

/// Checks one catalogued identity with the instance defaults.
///
/// # Safety
/// `id` must be a NUL-terminated string; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn relpow_verify(
    inst: *const RelpowInstance,
    id: *const c_char,
    seed: u64,
    control: bool,
    max_residual: *mut f64,
    pass: *mut bool,
) -> RelpowStatus {
    guard(|| {
        let i = &get(inst, "inst")?.0;
        let id = read_str(id, "id")?;
        if max_residual.is_null() || pass.is_null() {
            return Err(null("output"));
        }
        let opts = VerifyOptions { seed: Some(seed), control, ..Default::default() };
        let r = lib(verify_identity(id, i, &opts))?;
        *max_residual = r.max_residual;
        *pass = r.pass;
        Ok(())
    })
}
