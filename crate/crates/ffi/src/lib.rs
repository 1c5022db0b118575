//! C ABI over `surfacegrid`.
//!
//! Objects are opaque heap handles created by `sg_*` constructors and released
//! with the matching `sg_*_free`. Fallible calls return an [`SgStatus`]; on
//! failure, [`sg_last_error`] describes the most recent error on the calling
//! thread. Panics never cross the boundary; they surface as
//! [`SgStatus::Internal`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use surfacegrid::gauss::{eval_function_with_volume, load_function, save_function, DEFAULT_VOLUME};
use surfacegrid::imageio::{load_depth, load_surface, save_depth, save_surface};
use surfacegrid::metrics::{early_stop, mae, msre, StopAction};
use surfacegrid::render::{binarize_real_plot, render_surface, GridSpec, Pattern, SurfaceImage, Threshold};
use surfacegrid::{render_depth, synth_function, DepthMap, Error, FieldGrid, SurfaceFunction, Viewpoint};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Io = 4,
    Image = 5,
    Parse = 6,
    DimensionMismatch = 7,
    UndefinedMetric = 8,
    NoStructure = 9,
    BufferTooSmall = 10,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgPattern {
    Grid = 0,
    LinesU = 1,
    LinesV = 2,
}

/// Marking parameters; see [`sg_grid_spec_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgGridSpec {
    pub pattern: SgPattern,
    pub spacing_u: f64,
    pub spacing_v: f64,
    pub line_width: f64,
    pub grid_angle_deg: f64,
    pub draw_boundary: bool,
}

/// Early-stop verdict.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgStopDecision {
    pub stop: bool,
    pub rollback_epoch: usize,
}

pub struct SgFunction(SurfaceFunction);
pub struct SgField(FieldGrid);
pub struct SgDepthMap(DepthMap);
pub struct SgSurfaceImage(SurfaceImage);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("nul bytes removed")));
}

fn status_of(e: &Error) -> SgStatus {
    match e {
        Error::Io { .. } => SgStatus::Io,
        Error::Image { .. } => SgStatus::Image,
        Error::Parse { .. } | Error::ComponentCount(_) => SgStatus::Parse,
        Error::OutOfRange { .. } => SgStatus::OutOfRange,
        Error::DimensionMismatch(..) => SgStatus::DimensionMismatch,
        Error::UndefinedMetric | Error::ZeroBase => SgStatus::UndefinedMetric,
        Error::NoStructure => SgStatus::NoStructure,
        _ => SgStatus::InvalidArgument,
    }
}

struct Fail(SgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SgStatus::Ok,
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SgStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SgStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| Fail(SgStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize) -> Result<(), Fail> {
    if dst.is_null() {
        return Err(null("out"));
    }
    if len < src.len() {
        return Err(Fail(
            SgStatus::BufferTooSmall,
            format!("buffer holds {len} elements, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

fn viewpoint(az: f64, el: f64) -> Result<Viewpoint, Fail> {
    Ok(Viewpoint::new(az, el)?)
}

impl From<SgGridSpec> for GridSpec {
    fn from(g: SgGridSpec) -> Self {
        GridSpec {
            pattern: match g.pattern {
                SgPattern::Grid => Pattern::Grid,
                SgPattern::LinesU => Pattern::LinesU,
                SgPattern::LinesV => Pattern::LinesV,
            },
            spacing_u: g.spacing_u,
            spacing_v: g.spacing_v,
            line_width: g.line_width,
            grid_angle_deg: g.grid_angle_deg,
            draw_boundary: g.draw_boundary,
        }
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Square grid with period `spacing`, 3 px lines, no rotation, boundary band on.
#[no_mangle]
pub extern "C" fn sg_grid_spec_default(spacing: f64) -> SgGridSpec {
    let g = GridSpec::grid(spacing);
    SgGridSpec {
        pattern: SgPattern::Grid,
        spacing_u: g.spacing_u,
        spacing_v: g.spacing_v,
        line_width: g.line_width,
        grid_angle_deg: g.grid_angle_deg,
        draw_boundary: g.draw_boundary,
    }
}

/// Random surface function `id` of the stream seeded by `master_seed`.
#[no_mangle]
pub unsafe extern "C" fn sg_function_synth(master_seed: u64, id: u64, out: *mut *mut SgFunction) -> SgStatus {
    guard(|| emit(out, SgFunction(synth_function(master_seed, id))))
}

#[no_mangle]
pub unsafe extern "C" fn sg_function_load(path: *const c_char, out: *mut *mut SgFunction) -> SgStatus {
    guard(|| {
        let f = load_function(path_arg(path)?)?;
        emit(out, SgFunction(f))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_function_save(f: *const SgFunction, path: *const c_char) -> SgStatus {
    guard(|| Ok(save_function(&deref(f, "f")?.0, path_arg(path)?)?))
}

/// Number of Gaussian components, 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sg_function_component_count(f: *const SgFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.components().len())
}

/// Height at world `(x, y)`; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sg_function_value_at(f: *const SgFunction, x: f64, y: f64) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.value_at(x, y, DEFAULT_VOLUME))
}

#[no_mangle]
pub unsafe extern "C" fn sg_function_free(f: *mut SgFunction) {
    free(f)
}

/// Samples `f` on a `width`×`height` grid over the 512×512 domain.
#[no_mangle]
pub unsafe extern "C" fn sg_field_eval(
    f: *const SgFunction,
    width: usize,
    height: usize,
    out: *mut *mut SgField,
) -> SgStatus {
    guard(|| {
        if width < 2 || height < 2 {
            return Err(Fail(SgStatus::InvalidArgument, "field must be at least 2×2".into()));
        }
        let field = eval_function_with_volume(&deref(f, "f")?.0, width, height, DEFAULT_VOLUME);
        emit(out, SgField(field))
    })
}

/// Field from `width·height` row-major heights.
#[no_mangle]
pub unsafe extern "C" fn sg_field_from_values(
    values: *const f64,
    width: usize,
    height: usize,
    out: *mut *mut SgField,
) -> SgStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Fail(SgStatus::InvalidArgument, "size overflows".into()))?;
        let v = std::slice::from_raw_parts(values, n).to_vec();
        emit(out, SgField(FieldGrid::from_values(width, height, v)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_field_free(f: *mut SgField) {
    free(f)
}

#[no_mangle]
pub unsafe extern "C" fn sg_render_depth(
    field: *const SgField,
    azimuth_deg: f64,
    elevation_deg: f64,
    out: *mut *mut SgDepthMap,
) -> SgStatus {
    guard(|| {
        let field = &deref(field, "field")?.0;
        let v = viewpoint(azimuth_deg, elevation_deg)?;
        emit(out, SgDepthMap(render_depth(field, &v)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_render_surface(
    field: *const SgField,
    azimuth_deg: f64,
    elevation_deg: f64,
    spec: *const SgGridSpec,
    out: *mut *mut SgSurfaceImage,
) -> SgStatus {
    guard(|| {
        let field = &deref(field, "field")?.0;
        let g: GridSpec = (*deref(spec, "spec")?).into();
        g.validate()?;
        let v = viewpoint(azimuth_deg, elevation_deg)?;
        emit(out, SgSurfaceImage(render_surface(field, &v, &g)))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_depth_width(d: *const SgDepthMap) -> u32 {
    d.as_ref().map_or(0, |d| d.0.width())
}

#[no_mangle]
pub unsafe extern "C" fn sg_depth_height(d: *const SgDepthMap) -> u32 {
    d.as_ref().map_or(0, |d| d.0.height())
}

/// Copies the row-major values (0 = background) into `out[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn sg_depth_copy(d: *const SgDepthMap, out: *mut f64, len: usize) -> SgStatus {
    guard(|| copy_out(deref(d, "d")?.0.values(), out, len))
}

/// Writes a 16-bit grayscale PNG.
#[no_mangle]
pub unsafe extern "C" fn sg_depth_save(d: *const SgDepthMap, path: *const c_char) -> SgStatus {
    guard(|| Ok(save_depth(&deref(d, "d")?.0, path_arg(path)?)?))
}

#[no_mangle]
pub unsafe extern "C" fn sg_depth_load(path: *const c_char, out: *mut *mut SgDepthMap) -> SgStatus {
    guard(|| {
        let d = load_depth(path_arg(path)?)?;
        emit(out, SgDepthMap(d))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_depth_free(d: *mut SgDepthMap) {
    free(d)
}

#[no_mangle]
pub unsafe extern "C" fn sg_surface_width(s: *const SgSurfaceImage) -> u32 {
    s.as_ref().map_or(0, |s| s.0.width())
}

#[no_mangle]
pub unsafe extern "C" fn sg_surface_height(s: *const SgSurfaceImage) -> u32 {
    s.as_ref().map_or(0, |s| s.0.height())
}

/// Copies the row-major pixels as 0/1 bytes into `out[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn sg_surface_copy(s: *const SgSurfaceImage, out: *mut u8, len: usize) -> SgStatus {
    guard(|| copy_out(deref(s, "s")?.0.bits(), out, len))
}

/// Writes an 8-bit PNG with values {0, 255}.
#[no_mangle]
pub unsafe extern "C" fn sg_surface_save(s: *const SgSurfaceImage, path: *const c_char) -> SgStatus {
    guard(|| Ok(save_surface(&deref(s, "s")?.0, path_arg(path)?)?))
}

#[no_mangle]
pub unsafe extern "C" fn sg_surface_load(path: *const c_char, out: *mut *mut SgSurfaceImage) -> SgStatus {
    guard(|| {
        let s = load_surface(path_arg(path)?)?;
        emit(out, SgSurfaceImage(s))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_surface_free(s: *mut SgSurfaceImage) {
    free(s)
}

/// Binarizes an 8-bit grayscale scan to a 512×512 white-on-black image.
/// `threshold` < 0 selects the level automatically; 0..=255 fixes it.
#[no_mangle]
pub unsafe extern "C" fn sg_binarize(
    gray: *const u8,
    width: u32,
    height: u32,
    threshold: i32,
    out: *mut *mut SgSurfaceImage,
) -> SgStatus {
    guard(|| {
        if gray.is_null() {
            return Err(null("gray"));
        }
        let mode = match threshold {
            t if t < 0 => Threshold::Auto,
            t => Threshold::Fixed(
                u8::try_from(t).map_err(|_| Fail(SgStatus::OutOfRange, format!("threshold {t} exceeds 255")))?,
            ),
        };
        let n = width as usize * height as usize;
        let pixels = std::slice::from_raw_parts(gray, n).to_vec();
        let img = image::GrayImage::from_raw(width, height, pixels)
            .ok_or_else(|| Fail(SgStatus::InvalidArgument, "bad image size".into()))?;
        emit(out, SgSurfaceImage(binarize_real_plot(&img, mode)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_msre(pred: *const SgDepthMap, truth: *const SgDepthMap, out: *mut f64) -> SgStatus {
    guard(|| {
        let v = msre(&deref(pred, "pred")?.0, &deref(truth, "truth")?.0)?;
        copy_out(&[v], out, 1)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sg_mae(pred: *const SgDepthMap, truth: *const SgDepthMap, out: *mut f64) -> SgStatus {
    guard(|| {
        let v = mae(&deref(pred, "pred")?.0, &deref(truth, "truth")?.0)?;
        copy_out(&[v], out, 1)
    })
}

/// Early-stop rule over `len` per-epoch validation errors.
#[no_mangle]
pub unsafe extern "C" fn sg_early_stop(
    history: *const f64,
    len: usize,
    patience: usize,
    out: *mut SgStopDecision,
) -> SgStatus {
    guard(|| {
        if history.is_null() && len > 0 {
            return Err(null("history"));
        }
        let h = if len == 0 { &[][..] } else { std::slice::from_raw_parts(history, len) };
        let d = early_stop(h, patience);
        let res = SgStopDecision {
            stop: d.action == StopAction::Stop,
            rollback_epoch: d.rollback_epoch,
        };
        copy_out(&[res], out, 1)
    })
}
