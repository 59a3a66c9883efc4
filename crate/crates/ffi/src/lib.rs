//! C ABI over the `w2eps` library.
//!
//! Every fallible function returns a [`W2epsStatus`]; on failure the message
//! is kept per thread and read back with [`w2eps_last_error_message`].
//! Grids are opaque handles created by `w2eps_grid_*` and released with
//! [`w2eps_grid_free`]. Array outputs go into caller-provided buffers whose
//! length must equal [`w2eps_grid_len`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use w2eps::bounds::{exponent_report, Ellipticity};
use w2eps::envelope::a_convex_envelope;
use w2eps::grid::{GridFunction, GridSpec};
use w2eps::lambert::{lambert_w0, lambert_wm1, wm1_envelope_bounds};
use w2eps::theta::theta_field;
use w2eps::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum W2epsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Optimization = 3,
    DegenerateData = 4,
    Admissibility = 5,
    Condition = 6,
    Geometry = 7,
    InvalidGrid = 8,
    Io = 9,
    BufferSize = 10,
    Panic = 11,
    Other = 12,
}

/// Opaque sampled function on a grid.
pub struct W2epsGrid {
    inner: GridFunction,
}

/// Bounds for one parameter set. Absent optional bounds are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct W2epsExponentReport {
    pub n: u32,
    pub k: u32,
    pub ratio: f64,
    pub c: f64,
    pub c_star: f64,
    pub c_star_index: u32,
    pub gamma0: f64,
    pub epsilon_interior: f64,
    pub gamma_star: f64,
    pub f_at_gamma_star: f64,
    pub closed_form_lower: f64,
    pub tau_n: f64,
    pub refined_lower: f64,
    pub abstract_lower: f64,
    pub epsilon_upper: f64,
    pub ass_conjecture: f64,
    pub epsilon_global: f64,
    pub stationarity_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> W2epsStatus {
    match e {
        Error::Domain(_) => W2epsStatus::Domain,
        Error::Optimization(_) => W2epsStatus::Optimization,
        Error::DegenerateData(_) => W2epsStatus::DegenerateData,
        Error::Admissibility(_) => W2epsStatus::Admissibility,
        Error::Condition(_) => W2epsStatus::Condition,
        Error::Geometry(_) => W2epsStatus::Geometry,
        Error::InvalidGrid(_) => W2epsStatus::InvalidGrid,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => W2epsStatus::Io,
        _ => W2epsStatus::Other,
    }
}

fn fail(status: W2epsStatus, msg: impl Into<String>) -> W2epsStatus {
    set_error(msg.into());
    status
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), W2epsStatus>) -> W2epsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            W2epsStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(W2epsStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: w2eps::Result<T>) -> Result<T, W2epsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), W2epsStatus> {
    if p.is_null() {
        Err(fail(W2epsStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn grid_ref<'a>(g: *const W2epsGrid) -> Result<&'a GridFunction, W2epsStatus> {
    non_null(g, "grid")?;
    Ok(&(*g).inner)
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], W2epsStatus> {
    non_null(p, what)?;
    if len != need {
        return Err(fail(W2epsStatus::BufferSize, format!("{what} has length {len}; need {need}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copy the last error message of this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn w2eps_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Build a cube grid `[-half_width, half_width]^dim` with `points` per axis
/// and domain radius `half_width`, taking `values` (row-major, length
/// `points^dim`).
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_grid_new(
    dim: u32,
    points: u32,
    half_width: f64,
    values: *const f64,
    len: usize,
    out: *mut *mut W2epsGrid,
) -> W2epsStatus {
    guard(|| {
        non_null(values, "values")?;
        non_null(out, "out")?;
        let spec = lift(GridSpec::cube(dim as usize, points as usize, half_width))?;
        if len != spec.len() {
            return Err(fail(W2epsStatus::BufferSize, format!("values has length {len}; need {}", spec.len())));
        }
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let inner = lift(GridFunction::new(spec, data))?;
        *out = Box::into_raw(Box::new(W2epsGrid { inner }));
        Ok(())
    })
}

/// Load a grid from a JSON header file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_grid_load(path: *const c_char, out: *mut *mut W2epsGrid) -> W2epsStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(W2epsStatus::Domain, "path is not valid UTF-8"))?;
        let inner = lift(GridFunction::load(Path::new(p)))?;
        *out = Box::into_raw(Box::new(W2epsGrid { inner }));
        Ok(())
    })
}

/// Number of grid points, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn w2eps_grid_len(grid: *const W2epsGrid) -> usize {
    if grid.is_null() {
        0
    } else {
        (*grid).inner.values.len()
    }
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn w2eps_grid_free(grid: *mut W2epsGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Principal branch `W₀(z)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_lambert_w0(z: f64, out: *mut f64) -> W2epsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(lambert_w0(z))?.value;
        Ok(())
    })
}

/// Lower branch `W₋₁(z)` for `z` in `[-1/e, 0)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_lambert_wm1(z: f64, out: *mut f64) -> W2epsStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(lambert_wm1(z))?.value;
        Ok(())
    })
}

/// Bounds `lower <= W₋₁(-e^{-u-1}) <= upper` for `u >= 0`.
///
/// # Safety
/// `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_wm1_envelope_bounds(u: f64, lower: *mut f64, upper: *mut f64) -> W2epsStatus {
    guard(|| {
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        let (lo, hi) = lift(wm1_envelope_bounds(u))?;
        *lower = lo;
        *upper = hi;
        Ok(())
    })
}

/// Every exponent bound for dimension `n`, ratio `ratio`, index `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn w2eps_exponent_report(n: u32, ratio: f64, k: u32, out: *mut W2epsExponentReport) -> W2epsStatus {
    guard(|| {
        non_null(out, "out")?;
        let e = lift(Ellipticity::new(n as usize, ratio, k as usize))?;
        let r = lift(exponent_report(&e))?;
        *out = W2epsExponentReport {
            n,
            k,
            ratio: r.ratio,
            c: r.c,
            c_star: r.c_star,
            c_star_index: r.c_star_index as u32,
            gamma0: r.gamma0,
            epsilon_interior: r.epsilon_interior,
            gamma_star: r.gamma_star,
            f_at_gamma_star: r.f_at_gamma_star,
            closed_form_lower: r.closed_form_lower,
            tau_n: r.tau_n,
            refined_lower: r.refined_lower.unwrap_or(f64::NAN),
            abstract_lower: r.abstract_lower.unwrap_or(f64::NAN),
            epsilon_upper: r.epsilon_upper,
            ass_conjecture: r.ass_conjecture,
            epsilon_global: r.epsilon_global,
            stationarity_residual: r.stationarity_residual,
        };
        Ok(())
    })
}

/// Discrete `a`-convex envelope of `grid`. A negative or NaN `tol` selects
/// the default contact tolerance. `contact` receives 1 where the envelope
/// touches the data. Points outside the domain get NaN and 0.
///
/// # Safety
/// `grid` must be live; `envelope` and `contact` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn w2eps_a_convex_envelope(
    grid: *const W2epsGrid,
    a: f64,
    tol: f64,
    envelope: *mut f64,
    contact: *mut u8,
    len: usize,
) -> W2epsStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let need = g.values.len();
        let env_out = out_slice(envelope, len, need, "envelope")?;
        let contact_out = out_slice(contact, len, need, "contact")?;
        let tol = if tol >= 0.0 { Some(tol) } else { None };
        let r = lift(a_convex_envelope(g, a, tol))?;
        env_out.copy_from_slice(&r.envelope);
        for (c, &m) in contact_out.iter_mut().zip(&r.contact_mask) {
            *c = m as u8;
        }
        Ok(())
    })
}

/// Opening field `Θ` of `grid` up to `a_max`. `converged` receives 0 where
/// `Θ` exceeds `a_max` (then `theta` holds `a_max`).
///
/// # Safety
/// `grid` must be live; `theta` and `converged` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn w2eps_theta_field(
    grid: *const W2epsGrid,
    a_max: f64,
    theta: *mut f64,
    converged: *mut u8,
    len: usize,
) -> W2epsStatus {
    guard(|| {
        let g = grid_ref(grid)?;
        let need = g.values.len();
        let theta_out = out_slice(theta, len, need, "theta")?;
        let conv_out = out_slice(converged, len, need, "converged")?;
        let f = lift(theta_field(g, a_max))?;
        theta_out.copy_from_slice(&f.theta);
        for (c, &m) in conv_out.iter_mut().zip(&f.converged) {
            *c = m as u8;
        }
        Ok(())
    })
}
