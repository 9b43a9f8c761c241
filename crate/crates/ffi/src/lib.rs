//! C ABI for chaincraft.
//!
//! Geometries and sampled curves are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`CcStatus`]; the message of the most recent failure on the calling
//! thread is available from [`cc_last_error`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chaincraft::chain::{defect_of, integrate_chain, ChainConfig, ChainState};
use chaincraft::fefferman::{integrate_null_geodesic, metric_at, null_lift, ChartPoint, GeodesicConfig};
use chaincraft::integrate::{CurveSample, IntegrationConfig, Status};
use chaincraft::lie::LieAlgebraModel;
use chaincraft::{Error, SecondOrderOde};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Expression syntax error, unknown identifier or unbound parameter.
    Parse = 3,
    UnknownName = 4,
    /// Invalid argument or configuration.
    InvalidArgument = 5,
    /// Function domain error, pole or degenerate input.
    Domain = 6,
    /// Non-finite state or singular metric during integration.
    Numerical = 7,
    /// Output buffer too small.
    BufferTooSmall = 8,
    Panic = 9,
}

/// How an integration ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcCurveStatus {
    ReachedEnd = 0,
    Event = 1,
    MaxSteps = 2,
    NonFinite = 3,
}

/// A second-order ODE `y'' = f(x, y, y')`.
pub struct CcGeometry(SecondOrderOde);

/// A sampled curve: an independent variable, states and diagnostics per row.
pub struct CcCurve(CurveSample);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::UnboundParameter { .. } => CcStatus::Parse,
        Error::UnknownGeometry(_) => CcStatus::UnknownName,
        Error::Domain(_) | Error::Pole(_) | Error::Degenerate(_) => CcStatus::Domain,
        Error::NonFiniteState { .. } | Error::SingularMetric { .. } => CcStatus::Numerical,
        _ => CcStatus::InvalidArgument,
    }
}

struct Fail(CcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn fail(status: CcStatus, message: &str) -> Fail {
    Fail(status, message.to_owned())
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error("");
            CcStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            CcStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(fail(CcStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(CcStatus::InvalidUtf8, &format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CcStatus::NullPointer, &format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| fail(CcStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn params(names: *const *const c_char, values: *const f64, len: usize) -> Result<BTreeMap<String, f64>, Fail> {
    let names = slice(names, len, "parameter names")?;
    let values = slice(values, len, "parameter values")?;
    let mut map = BTreeMap::new();
    for (&name, &value) in names.iter().zip(values) {
        map.insert(text(name, "parameter name")?.to_owned(), value);
    }
    Ok(map)
}

unsafe fn geometry<'a>(g: *const CcGeometry) -> Result<&'a SecondOrderOde, Fail> {
    g.as_ref().map(|g| &g.0).ok_or_else(|| fail(CcStatus::NullPointer, "geometry is null"))
}

unsafe fn curve<'a>(c: *const CcCurve) -> Result<&'a CurveSample, Fail> {
    c.as_ref().map(|c| &c.0).ok_or_else(|| fail(CcStatus::NullPointer, "curve is null"))
}

/// Copies the last error message of the calling thread into `buf`
/// (NUL-terminated, truncated to `len`). Returns the full message length
/// in bytes, excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn cc_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a built-in geometry (`flat`, `hooke`, `poly-p`, ...).
/// `names`/`values` bind `n_params` parameters and may be null when zero.
#[no_mangle]
pub unsafe extern "C" fn cc_geometry_builtin(
    name: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    n_params: usize,
    out_geometry: *mut *mut CcGeometry,
) -> CcStatus {
    guard(|| {
        let slot = out(out_geometry, "out_geometry")?;
        let g = SecondOrderOde::builtin(text(name, "name")?, &params(names, values, n_params)?)?;
        *slot = Box::into_raw(Box::new(CcGeometry(g)));
        Ok(())
    })
}

/// Creates a geometry from an expression in `x`, `y`, `p` and parameters.
#[no_mangle]
pub unsafe extern "C" fn cc_geometry_from_expr(
    source: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    n_params: usize,
    out_geometry: *mut *mut CcGeometry,
) -> CcStatus {
    guard(|| {
        let slot = out(out_geometry, "out_geometry")?;
        let g = SecondOrderOde::from_source(text(source, "source")?, &params(names, values, n_params)?)?;
        *slot = Box::into_raw(Box::new(CcGeometry(g)));
        Ok(())
    })
}

/// Releases a geometry. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cc_geometry_free(geometry: *mut CcGeometry) {
    if !geometry.is_null() {
        drop(Box::from_raw(geometry));
    }
}

/// Evaluates `f(x, y, p)`.
#[no_mangle]
pub unsafe extern "C" fn cc_geometry_eval(
    geometry: *const CcGeometry,
    x: f64,
    y: f64,
    p: f64,
    out_value: *mut f64,
) -> CcStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        *slot = self::geometry(geometry)?.value(x, y, p)?;
        Ok(())
    })
}

/// Writes the 4x4 metric at `(x, y, p)` in row-major order into `out16`.
/// Coordinates are `(x, y, p, tau)`; the metric does not depend on `tau`.
#[no_mangle]
pub unsafe extern "C" fn cc_metric(geometry: *const CcGeometry, x: f64, y: f64, p: f64, out16: *mut f64) -> CcStatus {
    guard(|| {
        if out16.is_null() {
            return Err(fail(CcStatus::NullPointer, "out16 is null"));
        }
        let m = metric_at(self::geometry(geometry)?, &ChartPoint::new(x, y, p, 0.0))?;
        let dst = std::slice::from_raw_parts_mut(out16, 16);
        for i in 0..4 {
            for j in 0..4 {
                dst[4 * i + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

fn integration(tol: f64, max_steps: usize, default: IntegrationConfig) -> IntegrationConfig {
    let mut cfg = if tol > 0.0 { IntegrationConfig::dp54(tol, tol) } else { default.clone() };
    cfg.max_steps = if max_steps > 0 { max_steps } else { default.max_steps };
    cfg
}

/// Integrates the chain through `(x, y, p, yp, pp)` = `init5` up to `x_end`.
///
/// Rows hold `x`, then `y, p, yp, pp`, then `delta, resid`. A positive
/// `slope_bound` stops the chain where it turns vertical; `tol <= 0` and
/// `max_steps == 0` select the defaults.
#[no_mangle]
pub unsafe extern "C" fn cc_chain_integrate(
    geometry: *const CcGeometry,
    init5: *const f64,
    x_end: f64,
    slope_bound: f64,
    tol: f64,
    max_steps: usize,
    out_curve: *mut *mut CcCurve,
) -> CcStatus {
    guard(|| {
        let slot = out(out_curve, "out_curve")?;
        let g = self::geometry(geometry)?;
        let v = slice(init5, 5, "init5")?;
        let defaults = ChainConfig::default();
        let mut cfg = defaults.clone().with_integration(integration(tol, max_steps, defaults.integration));
        if slope_bound > 0.0 && slope_bound.is_finite() {
            cfg = cfg.with_slope_bound(slope_bound);
        }
        let c = integrate_chain(g, &ChainState::new(v[0], v[1], v[2], v[3], v[4]), x_end, &cfg)?;
        *slot = Box::into_raw(Box::new(CcCurve(c)));
        Ok(())
    })
}

/// Integrates the null geodesic through `(x, y, p)` with projected direction
/// `(xd, yd, pd)` = `dir3` over parameter time `[0, t_end]`.
///
/// Rows hold `t`, then `x, y, p, tau, xd, yd, pd, td`, then `nullity,
/// delta, chain_dist`.
#[no_mangle]
pub unsafe extern "C" fn cc_geodesic_integrate(
    geometry: *const CcGeometry,
    x: f64,
    y: f64,
    p: f64,
    dir3: *const f64,
    t_end: f64,
    tol: f64,
    max_steps: usize,
    out_curve: *mut *mut CcCurve,
) -> CcStatus {
    guard(|| {
        let slot = out(out_curve, "out_curve")?;
        let g = self::geometry(geometry)?;
        let d = slice(dir3, 3, "dir3")?;
        let start = null_lift(g, x, y, p, [d[0], d[1], d[2]])?;
        let defaults = GeodesicConfig::default();
        let cfg = GeodesicConfig { integration: integration(tol, max_steps, defaults.integration.clone()), ..defaults };
        let c = integrate_null_geodesic(g, &start, t_end, &cfg)?;
        *slot = Box::into_raw(Box::new(CcCurve(c)));
        Ok(())
    })
}

/// Releases a curve. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_free(curve: *mut CcCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of rows; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_len(curve: *const CcCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Values per row: the independent variable, states and diagnostics; 0 for null.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_width(curve: *const CcCurve) -> usize {
    curve.as_ref().map_or(0, |c| 1 + c.0.state_names.len() + c.0.diag_names.len())
}

/// How the integration ended.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_status(curve: *const CcCurve, out_status: *mut CcCurveStatus) -> CcStatus {
    guard(|| {
        let slot = out(out_status, "out_status")?;
        *slot = match self::curve(curve)?.status {
            Status::ReachedEnd => CcCurveStatus::ReachedEnd,
            Status::Event => CcCurveStatus::Event,
            Status::MaxSteps => CcCurveStatus::MaxSteps,
            Status::NonFinite => CcCurveStatus::NonFinite,
        };
        Ok(())
    })
}

/// Copies row `index` into `buf`, which must hold `cc_curve_width` values.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_row(curve: *const CcCurve, index: usize, buf: *mut f64, len: usize) -> CcStatus {
    guard(|| {
        let c = self::curve(curve)?;
        let row = c
            .points
            .get(index)
            .ok_or_else(|| fail(CcStatus::InvalidArgument, &format!("row {index} of {}", c.len())))?;
        let width = 1 + row.state.len() + row.diag.len();
        if len < width {
            return Err(fail(CcStatus::BufferTooSmall, &format!("row needs {width} values")));
        }
        if buf.is_null() {
            return Err(fail(CcStatus::NullPointer, "buf is null"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, width);
        dst[0] = row.t;
        dst[1..=row.state.len()].copy_from_slice(&row.state);
        dst[1 + row.state.len()..].copy_from_slice(&row.diag);
        Ok(())
    })
}

/// Copies the name of column `index` (NUL-terminated, truncated to `len`)
/// into `buf`. Returns the full name length, or 0 when out of range.
#[no_mangle]
pub unsafe extern "C" fn cc_curve_column_name(
    curve: *const CcCurve,
    index: usize,
    buf: *mut c_char,
    len: usize,
) -> usize {
    let Some(c) = curve.as_ref() else { return 0 };
    let c = &c.0;
    let name = std::iter::once(&c.t_name).chain(&c.state_names).chain(&c.diag_names).nth(index);
    let Some(name) = name else { return 0 };
    if !buf.is_null() && len > 0 {
        let n = name.len().min(len - 1);
        ptr::copy_nonoverlapping(name.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    name.len()
}

/// Largest `|resid|` along a chain curve.
#[no_mangle]
pub unsafe extern "C" fn cc_chain_defect(curve: *const CcCurve, out_defect: *mut f64) -> CcStatus {
    guard(|| {
        let slot = out(out_defect, "out_defect")?;
        *slot = defect_of(self::curve(curve)?)?;
        Ok(())
    })
}

/// Evaluates the Euler-Arnold right-hand side of a named homogeneous model
/// (`flat-heisenberg`, `flat-se2`, `circles-se2`, `hooke-sl2`, `horocycle`).
#[no_mangle]
pub unsafe extern "C" fn cc_model_euler(model: *const c_char, momentum4: *const f64, out4: *mut f64) -> CcStatus {
    guard(|| {
        let m = LieAlgebraModel::by_name(text(model, "model")?)?;
        let v = slice(momentum4, 4, "momentum4")?;
        if out4.is_null() {
            return Err(fail(CcStatus::NullPointer, "out4 is null"));
        }
        let rhs = m.euler_rhs(&[v[0], v[1], v[2], v[3]]);
        std::slice::from_raw_parts_mut(out4, 4).copy_from_slice(&rhs);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(status_of(&Error::UnknownGeometry("q".into())), CcStatus::UnknownName);
        assert_eq!(status_of(&Error::NonFiniteState { t: 0.0 }), CcStatus::Numerical);
        assert_eq!(status_of(&Error::Tangency { delta: 0.0 }), CcStatus::InvalidArgument);
    }

    #[test]
    fn panics_are_contained() {
        assert_eq!(guard(|| panic!("boom")), CcStatus::Panic);
        let mut buf = [0 as c_char; 32];
        let n = unsafe { cc_last_error(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(n, "internal panic".len());
    }
}
