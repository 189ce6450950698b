//! C interface to `oscmax`.
//!
//! Every entry point returns an [`OscmaxStatus`]; on failure the message is
//! kept per thread and can be read with [`oscmax_last_error`]. Grids are
//! opaque handles created by [`oscmax_grid_new`] and released with
//! [`oscmax_grid_free`]. Strings handed out by the library must be released
//! with [`oscmax_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oscmax::choquet::{choquet_integral, choquet_lp_norm, GridFunction, Region};
use oscmax::content::{content, CellSet, ContentParams};
use oscmax::geometry::{BaseDomain, DyadicCube, WindowFamily};
use oscmax::maximal::{beta_maximal, fractional_maximal, MaximalField, MaximalParams};
use oscmax::oscillation::{blo_norm, bmo_norm, NormReport, OscillationParams};
use oscmax::verify::{run_suite, ExperimentConfig, Suite};
use oscmax::Error;

/// Largest dimension whose witness anchor fits in [`OscmaxNormReport`].
pub const OSCMAX_MAX_DIM: usize = 8;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscmaxStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Domain = 3,
    Precondition = 4,
    Budget = 5,
    SizeCap = 6,
    Format = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscmaxFamily {
    Contained = 0,
    Centered = 1,
}

/// Norm value with the window attaining it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscmaxNormReport {
    pub norm_value: f64,
    /// Minimising constant (BMO) or β-essential infimum (BLO); NaN if none.
    pub witness_c: f64,
    pub witness_side_cells: u64,
    /// First `dim` entries are the witness anchor in cells.
    pub witness_anchor: [i64; OSCMAX_MAX_DIM],
}

/// Opaque grid function handle.
pub struct OscmaxGrid {
    inner: GridFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OscmaxStatus {
    match e {
        Error::Parameter(_) => OscmaxStatus::Parameter,
        Error::Domain(_) => OscmaxStatus::Domain,
        Error::Precondition(_) => OscmaxStatus::Precondition,
        Error::Budget { .. } => OscmaxStatus::Budget,
        Error::SizeCap(_) => OscmaxStatus::SizeCap,
        Error::Format(_) => OscmaxStatus::Format,
        Error::Io(_) => OscmaxStatus::Io,
    }
}

struct Fail(OscmaxStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OscmaxStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> OscmaxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            OscmaxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OscmaxStatus::Panic
        }
    }
}

unsafe fn grid_ref<'a>(grid: *const OscmaxGrid) -> Result<&'a GridFunction, Fail> {
    grid.as_ref().map(|g| &g.inner).ok_or_else(|| null("grid"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn domain(dim: usize, root_level: i32, resolution: u32) -> Result<BaseDomain, Fail> {
    if dim == 0 || dim > OSCMAX_MAX_DIM {
        return Err(Fail(OscmaxStatus::Parameter, format!("dim must be in 1..={OSCMAX_MAX_DIM}, got {dim}")));
    }
    Ok(BaseDomain::new(DyadicCube::origin(dim, root_level), resolution)?)
}

fn family(family: OscmaxFamily, max_radius: i64) -> WindowFamily {
    match family {
        OscmaxFamily::Contained => WindowFamily::Contained,
        OscmaxFamily::Centered => {
            WindowFamily::CenteredClipped { max_radius: u64::try_from(max_radius).ok() }
        }
    }
}

unsafe fn copy_field(field: &MaximalField, out: *mut f64, out_len: usize) -> Result<(), Fail> {
    let n = field.values.len();
    if out_len < n {
        return Err(Fail(OscmaxStatus::BufferTooSmall, format!("output buffer holds {out_len} values, {n} needed")));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(field.values.as_ptr(), out, n);
    Ok(())
}

fn report(r: &NormReport) -> OscmaxNormReport {
    let mut anchor = [0i64; OSCMAX_MAX_DIM];
    for (a, &v) in anchor.iter_mut().zip(&r.witness_window.anchor) {
        *a = v;
    }
    OscmaxNormReport {
        norm_value: r.norm_value,
        witness_c: r.witness_c.unwrap_or(f64::NAN),
        witness_side_cells: r.witness_window.side_cells,
        witness_anchor: anchor,
    }
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn oscmax_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Create a grid of `2^(dim·resolution)` row-major values on the dyadic root
/// cube `[0, 2^root_level)^dim`.
///
/// # Safety
/// `values` must be valid for `len` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn oscmax_grid_new(
    dim: usize,
    root_level: i32,
    resolution: u32,
    values: *const f64,
    len: usize,
    out: *mut *mut OscmaxGrid,
) -> OscmaxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = domain(dim, root_level, resolution)?;
        let v = slice(values, len, "values")?.to_vec();
        let g = GridFunction::new(d, v)?;
        *out = Box::into_raw(Box::new(OscmaxGrid { inner: g }));
        Ok(())
    })
}

/// Release a grid. Null is ignored.
///
/// # Safety
/// `grid` must come from [`oscmax_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oscmax_grid_free(grid: *mut OscmaxGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of cells of a grid (0 for null).
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn oscmax_grid_len(grid: *const OscmaxGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.values.len())
}

/// Content `H^β_∞` of the cells whose `mask` entry is nonzero.
///
/// # Safety
/// `mask` must be valid for `len` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn oscmax_content(
    dim: usize,
    root_level: i32,
    resolution: u32,
    mask: *const u8,
    len: usize,
    beta: f64,
    out: *mut f64,
) -> OscmaxStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = domain(dim, root_level, resolution)?;
        let bits: Vec<bool> = slice(mask, len, "mask")?.iter().map(|&b| b != 0).collect();
        let e = CellSet::from_mask(d, &bits)?;
        *out = content(&e, ContentParams::new(beta)?)?.value;
        Ok(())
    })
}

/// Choquet integral of a nonnegative grid over the root; with `p > 0` the
/// Choquet `L^p` norm instead.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn oscmax_choquet(grid: *const OscmaxGrid, beta: f64, p: f64, out: *mut f64) -> OscmaxStatus {
    guard(|| {
        let f = grid_ref(grid)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ContentParams::new(beta)?;
        *out = if p > 0.0 {
            choquet_lp_norm(f, &Region::Root, p, params)?
        } else {
            choquet_integral(f, &Region::Root, params)?
        };
        Ok(())
    })
}

/// Fractional maximal function `M_α f` written cellwise into `out`.
/// `max_radius < 0` leaves the centered family unbounded.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn oscmax_fractional_maximal(
    grid: *const OscmaxGrid,
    alpha: f64,
    fam: OscmaxFamily,
    max_radius: i64,
    out: *mut f64,
    out_len: usize,
) -> OscmaxStatus {
    guard(|| {
        let f = grid_ref(grid)?;
        let mut params = MaximalParams::new(alpha);
        params.family = family(fam, max_radius);
        copy_field(&fractional_maximal(f, &params)?, out, out_len)
    })
}

/// β-dimensional maximal function `M^β f` written cellwise into `out`.
///
/// # Safety
/// As for [`oscmax_fractional_maximal`].
#[no_mangle]
pub unsafe extern "C" fn oscmax_beta_maximal(
    grid: *const OscmaxGrid,
    beta: f64,
    fam: OscmaxFamily,
    max_radius: i64,
    out: *mut f64,
    out_len: usize,
) -> OscmaxStatus {
    guard(|| {
        let f = grid_ref(grid)?;
        copy_field(&beta_maximal(f, ContentParams::new(beta)?, family(fam, max_radius))?, out, out_len)
    })
}

unsafe fn norm_entry(
    grid: *const OscmaxGrid,
    beta: f64,
    p: f64,
    fam: OscmaxFamily,
    max_radius: i64,
    out: *mut OscmaxNormReport,
    which: fn(&GridFunction, &OscillationParams) -> oscmax::Result<NormReport>,
) -> OscmaxStatus {
    guard(|| {
        let f = grid_ref(grid)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = OscillationParams::new(beta, p)?.with_family(family(fam, max_radius));
        *out = report(&which(f, &params)?);
        Ok(())
    })
}

/// `‖f‖_{BMO^{β,p}}` with its witness window.
///
/// # Safety
/// `grid` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn oscmax_bmo_norm(
    grid: *const OscmaxGrid,
    beta: f64,
    p: f64,
    fam: OscmaxFamily,
    max_radius: i64,
    out: *mut OscmaxNormReport,
) -> OscmaxStatus {
    norm_entry(grid, beta, p, fam, max_radius, out, bmo_norm)
}

/// `‖f‖_{BLO^{β,p}}` with its witness window.
///
/// # Safety
/// As for [`oscmax_bmo_norm`].
#[no_mangle]
pub unsafe extern "C" fn oscmax_blo_norm(
    grid: *const OscmaxGrid,
    beta: f64,
    p: f64,
    fam: OscmaxFamily,
    max_radius: i64,
    out: *mut OscmaxNormReport,
) -> OscmaxStatus {
    norm_entry(grid, beta, p, fam, max_radius, out, blo_norm)
}

/// Run a named experiment suite with its default configuration. The JSON
/// report is returned in `out_json` (free with [`oscmax_string_free`]) and
/// `out_passed` is set to 1 when no verdict failed.
///
/// # Safety
/// `suite` must be a NUL-terminated string; the out pointers must be valid
/// for a write.
#[no_mangle]
pub unsafe extern "C" fn oscmax_verify(
    suite: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
    out_passed: *mut i32,
) -> OscmaxStatus {
    guard(|| {
        if suite.is_null() {
            return Err(null("suite"));
        }
        if out_json.is_null() || out_passed.is_null() {
            return Err(null("out"));
        }
        let name = CStr::from_ptr(suite)
            .to_str()
            .map_err(|_| Fail(OscmaxStatus::Parameter, "suite name is not UTF-8".into()))?;
        let s: Suite = name.parse()?;
        let r = run_suite(&ExperimentConfig::default_for(s, seed), false)?;
        let json = CString::new(r.to_json()?).map_err(|e| Fail(OscmaxStatus::Format, e.to_string()))?;
        *out_passed = i32::from(r.passed());
        *out_json = json.into_raw();
        Ok(())
    })
}

/// Release a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oscmax_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
