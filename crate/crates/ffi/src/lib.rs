//! C ABI over `jcas`.
//!
//! Every fallible entry point returns a [`JcasStatus`] and writes its result
//! through an out-pointer. On failure a description is kept per thread and
//! can be read with [`jcas_last_error`]. Handles are opaque and must be
//! released with the matching `_free` function; strings handed out by the
//! library are released with [`jcas_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use jcas::bistatic::{self, ExponentQuery};
use jcas::region::{self, BA_TOL, COMPOUND_REFINE_TOL};
use jcas::sim::{self, ExponentFit, Sampler};
use jcas::{ChannelFamily, ChannelMode, Distribution, JcasError, RegionCurve};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcasStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    InvalidArgument = 4,
    Unsupported = 5,
    InsufficientData = 6,
    NonConvergence = 7,
    Io = 8,
    Panic = 9,
}

/// Interpretation of a channel spec.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcasMode {
    MonoStatic = 0,
    BiStatic = 1,
}

/// Which bi-static exponent to compute.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JcasRhoKind {
    Successive = 0,
    Joint = 1,
    JointLowerBound = 2,
}

/// Opaque channel family.
pub struct JcasChannel(ChannelFamily);

/// Opaque region curve.
pub struct JcasCurve(RegionCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &JcasError) -> JcasStatus {
    match err {
        JcasError::Malformed(_)
        | JcasError::NotStochastic { .. }
        | JcasError::DimensionMismatch(_)
        | JcasError::MissingSensingKernel
        | JcasError::TooFewStates { .. }
        | JcasError::Indistinguishable(_)
        | JcasError::Json(_) => JcasStatus::InvalidSpec,
        JcasError::Unsupported(_) => JcasStatus::Unsupported,
        JcasError::InvalidArgument(_) | JcasError::MemoryCap { .. } => JcasStatus::InvalidArgument,
        JcasError::NonConvergence { .. } => JcasStatus::NonConvergence,
        JcasError::InsufficientData(_) => JcasStatus::InsufficientData,
        JcasError::Io(_) => JcasStatus::Io,
    }
}

enum Failure {
    Status(JcasStatus, String),
    Core(JcasError),
}

impl From<JcasError> for Failure {
    fn from(e: JcasError) -> Self {
        Failure::Core(e)
    }
}

fn guard<F>(f: F) -> JcasStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JcasStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Status(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal panic: {msg}"));
            JcasStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(JcasStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn floats<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn input_dist(p: *const f64, len: usize) -> Result<Distribution, Failure> {
    Ok(Distribution::new(floats(p, len, "p_x")?.to_vec())?)
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message for the last failed call on this thread, or null when the last
/// call succeeded. The pointer stays valid until the next call into the
/// library on the same thread.
#[no_mangle]
pub extern "C" fn jcas_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn jcas_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a JSON channel spec.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jcas_channel_from_json(
    json: *const c_char,
    mode: JcasMode,
    out_channel: *mut *mut JcasChannel,
) -> JcasStatus {
    guard(|| {
        let slot = out(out_channel, "out_channel")?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Status(JcasStatus::InvalidUtf8, e.to_string()))?;
        let mode = match mode {
            JcasMode::MonoStatic => ChannelMode::MonoStatic,
            JcasMode::BiStatic => ChannelMode::BiStatic,
        };
        let family = ChannelFamily::from_json(text, mode)?;
        *slot = Box::into_raw(Box::new(JcasChannel(family)));
        Ok(())
    })
}

/// # Safety
/// `channel` must be null or a live handle from [`jcas_channel_from_json`].
#[no_mangle]
pub unsafe extern "C" fn jcas_channel_free(channel: *mut JcasChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Alphabet and state counts. Any out-pointer may be null.
///
/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_channel_dims(
    channel: *const JcasChannel,
    x_size: *mut usize,
    y_size: *mut usize,
    z_size: *mut usize,
    num_states: *mut usize,
) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        for (p, v) in [(x_size, f.x_size()), (y_size, f.y_size()), (z_size, f.z_size()), (num_states, f.num_states())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Detection exponent `φ(P_X)` for an input distribution of length `|X|`.
///
/// # Safety
/// `channel` must be a live handle, `p_x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn jcas_phi(
    channel: *const JcasChannel,
    p_x: *const f64,
    len: usize,
    tol: f64,
    out_value: *mut f64,
) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        let slot = out(out_value, "out_value")?;
        let p = input_dist(p_x, len)?;
        *slot = jcas::info::phi(&p, f, tol)?;
        Ok(())
    })
}

/// Compound capacity `max_P min_s I(P, W_s)`; `argmax` may be null,
/// otherwise it receives `|X|` doubles.
///
/// # Safety
/// `channel` must be a live handle; `argmax`, when non-null, must hold `|X|` doubles.
#[no_mangle]
pub unsafe extern "C" fn jcas_compound_capacity(
    channel: *const JcasChannel,
    resolution: usize,
    out_value: *mut f64,
    argmax: *mut f64,
) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        let slot = out(out_value, "out_value")?;
        let res = if resolution == 0 { region::default_resolution(f.x_size())? } else { resolution };
        let c = region::compound_capacity(f, res, COMPOUND_REFINE_TOL)?;
        *slot = c.value;
        if !argmax.is_null() {
            slice::from_raw_parts_mut(argmax, f.x_size()).copy_from_slice(c.argmax_input.probs());
        }
        Ok(())
    })
}

/// `min_s C(W_s)`.
///
/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_worst_case_capacity(channel: *const JcasChannel, out_value: *mut f64) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        let slot = out(out_value, "out_value")?;
        *slot = region::worst_case_capacity(f, BA_TOL)?.value;
        Ok(())
    })
}

/// Bi-static exponent at rate `rate`. `row_grid == 0` selects the default grid.
///
/// # Safety
/// `channel` must be a live handle, `p_x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn jcas_rho(
    channel: *const JcasChannel,
    kind: JcasRhoKind,
    p_x: *const f64,
    len: usize,
    rate: f64,
    row_grid: usize,
    out_value: *mut f64,
) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        let slot = out(out_value, "out_value")?;
        let mut q = ExponentQuery::new(f, input_dist(p_x, len)?, rate)?;
        if row_grid != 0 {
            q = q.with_grid(row_grid)?;
        }
        *slot = match kind {
            JcasRhoKind::Successive => bistatic::rho_succ(&q)?,
            JcasRhoKind::Joint => bistatic::rho_joint(&q)?.rho,
            JcasRhoKind::JointLowerBound => bistatic::rho_joint_lower_bound(&q)?,
        };
        Ok(())
    })
}

/// Whether every sensing kernel is output-symmetric within `tol`.
///
/// # Safety
/// `channel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_check_symmetry(channel: *const JcasChannel, tol: f64, out_symmetric: *mut bool) -> JcasStatus {
    guard(|| {
        let f = &deref(channel, "channel")?.0;
        let slot = out(out_symmetric, "out_symmetric")?;
        *slot = f.check_output_symmetry(tol).symmetric;
        Ok(())
    })
}

/// Open-loop mono-static frontier. `resolution == 0` selects the default.
///
/// # Safety
/// `channel` must be a live handle; `out_curve` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jcas_region_mono_open(
    channel: *const JcasChannel,
    resolution: usize,
    out_curve: *mut *mut JcasCurve,
) -> JcasStatus {
    guard(|| {
        let slot = out(out_curve, "out_curve")?;
        *slot = ptr::null_mut();
        let f = &deref(channel, "channel")?.0;
        let res = if resolution == 0 { region::default_resolution(f.x_size())? } else { resolution };
        let curve = region::mono_open_region(f, res, BA_TOL)?;
        *slot = Box::into_raw(Box::new(JcasCurve(curve)));
        Ok(())
    })
}

/// Closed-loop mono-static inner bound sampled at `e_samples` exponents.
///
/// # Safety
/// `channel` must be a live handle; `out_curve` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jcas_region_mono_closed(
    channel: *const JcasChannel,
    resolution: usize,
    e_samples: usize,
    out_curve: *mut *mut JcasCurve,
) -> JcasStatus {
    guard(|| {
        let slot = out(out_curve, "out_curve")?;
        *slot = ptr::null_mut();
        let f = &deref(channel, "channel")?.0;
        let res = if resolution == 0 { region::default_resolution(f.x_size())? } else { resolution };
        let curve = region::mono_closed_inner_region(f, res, e_samples, BA_TOL)?;
        *slot = Box::into_raw(Box::new(JcasCurve(curve)));
        Ok(())
    })
}

/// Number of points on a curve; 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_curve_len(curve: *const JcasCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.points.len())
}

/// Point `index` as `(E, R)` in nats.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_curve_point(
    curve: *const JcasCurve,
    index: usize,
    out_exponent: *mut f64,
    out_rate: *mut f64,
) -> JcasStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.0;
        let (e, r) = *c.points.get(index).ok_or_else(|| {
            Failure::Status(
                JcasStatus::InvalidArgument,
                format!("index {index} out of range for {} points", c.points.len()),
            )
        })?;
        *out(out_exponent, "out_exponent")? = e;
        *out(out_rate, "out_rate")? = r;
        Ok(())
    })
}

/// Curve as CSV; free with [`jcas_string_free`].
///
/// # Safety
/// `curve` must be a live handle; `out_csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jcas_curve_to_csv(curve: *const JcasCurve, out_csv: *mut *mut c_char) -> JcasStatus {
    guard(|| {
        let slot = out(out_csv, "out_csv")?;
        *slot = ptr::null_mut();
        *slot = to_c_string(deref(curve, "curve")?.0.to_csv());
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jcas_curve_free(curve: *mut JcasCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Open-loop mono-static simulation. Writes the report CSV to `out_csv`
/// (free with [`jcas_string_free`]) and the fitted exponent to
/// `out_exponent`: `INFINITY` when no detection error occurred, `NAN` when
/// too few block lengths had enough errors. Runs on the calling thread's
/// rayon pool.
///
/// # Safety
/// `channel` must be a live handle; `p_type` must point to `type_len`
/// doubles and `n_list` to `n_len` sizes.
#[no_mangle]
pub unsafe extern "C" fn jcas_simulate_mono(
    channel: *const JcasChannel,
    p_type: *const f64,
    type_len: usize,
    n_list: *const usize,
    n_len: usize,
    trials: usize,
    seed: u64,
    tilted: bool,
    out_exponent: *mut f64,
    out_csv: *mut *mut c_char,
) -> JcasStatus {
    guard(|| {
        let csv_slot = out(out_csv, "out_csv")?;
        *csv_slot = ptr::null_mut();
        let exp_slot = out(out_exponent, "out_exponent")?;
        let f = &deref(channel, "channel")?.0;
        let p = input_dist(p_type, type_len)?;
        if n_list.is_null() {
            return Err(null("n_list"));
        }
        let ns = slice::from_raw_parts(n_list, n_len);
        let sampler = if tilted { Sampler::Tilted } else { Sampler::Direct };
        let report = sim::simulate_mono_open(f, &p, ns, trials, seed, sampler)?;
        *exp_slot = match report.fitted_exponent {
            ExponentFit::Fitted(v) => v,
            ExponentFit::Infinite => f64::INFINITY,
            ExponentFit::InsufficientData => f64::NAN,
        };
        *csv_slot = to_c_string(report.to_csv());
        Ok(())
    })
}
