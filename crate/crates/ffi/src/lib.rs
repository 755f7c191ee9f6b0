//! C ABI over `resonant`.
//!
//! Every function returns an [`RsStatus`]; on failure the message is kept per
//! thread and can be read with [`rs_last_error_message`]. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use resonant::assembly::Discretization;
use resonant::geometry::{BoundaryClosure, ModelSurface};
use resonant::oracle::cylinder::cylinder_resonances_exact;
use resonant::oracle::suite::run_suite;
use resonant::resonance::{compute_resonances, ModeRange, PipelineConfig, ResonanceError, ResonanceSet, Shifts, Window};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    OutOfRange = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for RsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<RsComplex> for Complex64 {
    fn from(z: RsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Closed rectangle in the `lambda` plane.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl From<RsWindow> for Window {
    fn from(w: RsWindow) -> Self {
        Window::new(w.re_min, w.re_max, w.im_min, w.im_max)
    }
}

pub const RS_CLOSURE_MASK_DIRICHLET: u32 = 1;
pub const RS_CLOSURE_MASK_NEUMANN: u32 = 2;
pub const RS_DISCRETIZATION_COLLOCATION: u32 = 0;
pub const RS_DISCRETIZATION_ULTRASPHERICAL: u32 = 1;

/// Pipeline settings; `shifts` may be null with `shift_count == 0` for automatic tiling.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RsPipelineConfig {
    pub grid_n: usize,
    pub x_min: f64,
    /// Bitmask of `RS_CLOSURE_MASK_*`.
    pub closures: u32,
    pub residual_tol: f64,
    pub match_tol: f64,
    pub keep_radius: f64,
    pub cluster_tol: f64,
    /// One of `RS_DISCRETIZATION_*`.
    pub discretization: u32,
    pub shifts: *const RsComplex,
    pub shift_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsClosure {
    Dirichlet = 1,
    Neumann = 2,
}

impl From<BoundaryClosure> for RsClosure {
    fn from(c: BoundaryClosure) -> Self {
        match c {
            BoundaryClosure::Dirichlet => RsClosure::Dirichlet,
            BoundaryClosure::Neumann => RsClosure::Neumann,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsCandidate {
    pub lambda: RsComplex,
    pub zeta: RsComplex,
    pub mode_k: i64,
    pub residual: f64,
    pub match_error: f64,
    pub closure: RsClosure,
    pub grid_n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsExactResonance {
    pub lambda: RsComplex,
    pub closure: RsClosure,
    pub multiplicity: u32,
}

/// Opaque surface model.
pub struct RsModel(ModelSurface);

/// Opaque pipeline result.
pub struct RsResonanceSet(ResonanceSet);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

type FfiResult = Result<(), (RsStatus, String)>;

/// Runs `body`, recording failures and converting panics.
fn guard(body: impl FnOnce() -> FfiResult) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            RsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RsStatus::Panic
        }
    }
}

fn null(name: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl ToString) -> (RsStatus, String) {
    (RsStatus::InvalidArgument, msg.to_string())
}

fn from_resonance_error(e: ResonanceError) -> (RsStatus, String) {
    match e {
        ResonanceError::InvalidWindow(_) | ResonanceError::InvalidConfig(_) | ResonanceError::Geometry(_) => invalid(e),
        other => (RsStatus::NumericalFailure, other.to_string()),
    }
}

/// Copies the last error of this thread into `buf` (NUL-terminated, truncated to
/// `len`) and returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn rs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn store_model(model: ModelSurface, out: *mut *mut RsModel) -> FfiResult {
    if out.is_null() {
        return Err(null("out"));
    }
    model.validate().map_err(invalid)?;
    *out = Box::into_raw(Box::new(RsModel(model)));
    Ok(())
}

/// Hyperbolic cylinder with neck length `ell`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_model_cylinder(ell: f64, out: *mut *mut RsModel) -> RsStatus {
    guard(|| store_model(ModelSurface::HyperbolicCylinder { ell }, out))
}

/// Cylinder whose warp carries a Gaussian bump of amplitude `a` and width `w`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_model_perturbed(ell: f64, a: f64, w: f64, out: *mut *mut RsModel) -> RsStatus {
    guard(|| store_model(ModelSurface::PerturbedCylinder { ell, a, w }, out))
}

/// # Safety
/// `model` must be null or a handle from `rs_model_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_model_free(model: *mut RsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fills `out` with the library defaults (automatic shifts).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_pipeline_config_default(out: *mut RsPipelineConfig) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = PipelineConfig::default();
        *out = RsPipelineConfig {
            grid_n: d.grid_n,
            x_min: d.x_min,
            closures: RS_CLOSURE_MASK_DIRICHLET | RS_CLOSURE_MASK_NEUMANN,
            residual_tol: d.residual_tol,
            match_tol: d.match_tol,
            keep_radius: d.keep_radius,
            cluster_tol: d.cluster_tol,
            discretization: RS_DISCRETIZATION_ULTRASPHERICAL,
            shifts: std::ptr::null(),
            shift_count: 0,
        };
        Ok(())
    })
}

unsafe fn pipeline_config(c: &RsPipelineConfig) -> Result<PipelineConfig, (RsStatus, String)> {
    if c.closures & !(RS_CLOSURE_MASK_DIRICHLET | RS_CLOSURE_MASK_NEUMANN) != 0 {
        return Err(invalid(format!("unknown closure bits {:#x}", c.closures)));
    }
    let closures: Vec<BoundaryClosure> = [
        (RS_CLOSURE_MASK_DIRICHLET, BoundaryClosure::Dirichlet),
        (RS_CLOSURE_MASK_NEUMANN, BoundaryClosure::Neumann),
    ]
    .iter()
    .filter(|(bit, _)| c.closures & bit != 0)
    .map(|&(_, cl)| cl)
    .collect();
    let discretization = match c.discretization {
        RS_DISCRETIZATION_COLLOCATION => Discretization::Collocation,
        RS_DISCRETIZATION_ULTRASPHERICAL => Discretization::Ultraspherical,
        other => return Err(invalid(format!("unknown discretization {other}"))),
    };
    let shifts = if c.shift_count == 0 {
        Shifts::Auto
    } else if c.shifts.is_null() {
        return Err(null("shifts"));
    } else {
        Shifts::Explicit(
            std::slice::from_raw_parts(c.shifts, c.shift_count)
                .iter()
                .map(|&z| z.into())
                .collect(),
        )
    };
    let cfg = PipelineConfig {
        grid_n: c.grid_n,
        x_min: c.x_min,
        closures,
        shifts,
        residual_tol: c.residual_tol,
        match_tol: c.match_tol,
        keep_radius: c.keep_radius,
        cluster_tol: c.cluster_tol,
        discretization,
        ..PipelineConfig::default()
    };
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

/// Resonances of `model` for modes `k_min..=k_max` inside `window`.
///
/// # Safety
/// `model` must be a live handle, `config` null (defaults) or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_compute_resonances(
    model: *const RsModel,
    k_min: i64,
    k_max: i64,
    window: RsWindow,
    config: *const RsPipelineConfig,
    out: *mut *mut RsResonanceSet,
) -> RsStatus {
    guard(|| {
        if model.is_null() {
            return Err(null("model"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if k_min > k_max {
            return Err(invalid(format!("k_min {k_min} exceeds k_max {k_max}")));
        }
        let cfg = if config.is_null() {
            PipelineConfig::default()
        } else {
            pipeline_config(&*config)?
        };
        let set = compute_resonances(&(*model).0, ModeRange::new(k_min, k_max), &window.into(), &cfg)
            .map_err(from_resonance_error)?;
        if set.problems > 0 && set.failed_problems == set.problems {
            return Err((
                RsStatus::NumericalFailure,
                format!("every mode failed: {}", set.warnings.first().cloned().unwrap_or_default()),
            ));
        }
        *out = Box::into_raw(Box::new(RsResonanceSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_resonance_set_len(set: *const RsResonanceSet, len: *mut usize) -> RsStatus {
    guard(|| {
        if set.is_null() || len.is_null() {
            return Err(null("set or len"));
        }
        *len = (*set).0.candidates.len();
        Ok(())
    })
}

/// Candidate `index` in `(mode_k, Re lambda, Im lambda, closure)` order.
///
/// # Safety
/// `set` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_resonance_set_get(
    set: *const RsResonanceSet,
    index: usize,
    out: *mut RsCandidate,
) -> RsStatus {
    guard(|| {
        if set.is_null() || out.is_null() {
            return Err(null("set or out"));
        }
        let cands = &(*set).0.candidates;
        let c = cands
            .get(index)
            .ok_or_else(|| (RsStatus::OutOfRange, format!("index {index} >= {}", cands.len())))?;
        *out = RsCandidate {
            lambda: c.lambda.into(),
            zeta: c.zeta.into(),
            mode_k: c.mode_k,
            residual: c.residual,
            match_error: c.match_error,
            closure: c.closure.into(),
            grid_n: c.grid_n,
        };
        Ok(())
    })
}

/// Number of warnings recorded while computing `set`.
///
/// # Safety
/// `set` must be a live handle and `count` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_resonance_set_warning_count(set: *const RsResonanceSet, count: *mut usize) -> RsStatus {
    guard(|| {
        if set.is_null() || count.is_null() {
            return Err(null("set or count"));
        }
        *count = (*set).0.warnings.len();
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rs_resonance_set_free(set: *mut RsResonanceSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Exact cylinder resonances of mode `k` in `window`, written to `buf`.
///
/// `*len` receives the number of values; `RS_STATUS_BUFFER_TOO_SMALL` is
/// returned when it exceeds `capacity`, with nothing written.
///
/// # Safety
/// `buf` must be valid for `capacity` elements (or null when `capacity` is 0); `len` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_cylinder_exact(
    ell: f64,
    k: i64,
    window: RsWindow,
    buf: *mut RsExactResonance,
    capacity: usize,
    len: *mut usize,
) -> RsStatus {
    guard(|| {
        if len.is_null() {
            return Err(null("len"));
        }
        let values = cylinder_resonances_exact(ell, k, &window.into()).map_err(invalid)?;
        *len = values.len();
        if values.len() > capacity {
            return Err((
                RsStatus::BufferTooSmall,
                format!("{} values, capacity {capacity}", values.len()),
            ));
        }
        if !values.is_empty() && buf.is_null() {
            return Err(null("buf"));
        }
        for (i, v) in values.iter().enumerate() {
            *buf.add(i) = RsExactResonance {
                lambda: v.lambda.into(),
                closure: v.closure.into(),
                multiplicity: v.multiplicity as u32,
            };
        }
        Ok(())
    })
}

/// Runs a named oracle suite; `*all_pass` reports whether every check passed.
///
/// # Safety
/// `suite` must be a NUL-terminated string and `all_pass` valid.
#[no_mangle]
pub unsafe extern "C" fn rs_verify(suite: *const c_char, all_pass: *mut bool) -> RsStatus {
    guard(|| {
        if suite.is_null() || all_pass.is_null() {
            return Err(null("suite or all_pass"));
        }
        let name = CStr::from_ptr(suite).to_str().map_err(invalid)?;
        let reports = run_suite(name).map_err(|e| match e {
            resonant::oracle::OracleError::UnknownSuite(_) => invalid(e),
            other => (RsStatus::NumericalFailure, other.to_string()),
        })?;
        *all_pass = reports.iter().all(|r| r.pass);
        Ok(())
    })
}
