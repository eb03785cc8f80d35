//! C interface to moproc.
//!
//! Tasks and motions cross the boundary as opaque handles released with
//! `mp_task_free` and `mp_motion_free`. Every fallible call returns an
//! `MpStatus`; on failure `mp_last_error` holds the message on the same
//! thread until the next call. Returned strings are freed with
//! `mp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use moproc::dsl::{ParamValue, Params};
use moproc::kinematics::io::{read_motion_json, write_motion_json};
use moproc::kinematics::{default_skeleton, MotionSequence, Skeleton};
use moproc::metrics::{evaluate_motion, MetricsConfig};
use moproc::optimizer::{relax_and_minimize, OptimConfig, OptimError, RelaxSpec};
use moproc::priors::PriorSpec;
use moproc::tasks::{get_task, TaskError, TaskSpec};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Program text failed to parse or check.
    Parse = 3,
    /// Unknown id, bad parameter or bad configuration.
    Invalid = 4,
    /// Non-finite values during evaluation or optimization.
    Numeric = 5,
    Panic = 6,
}

/// A compiled task plus its parameter overrides.
pub struct MpTask {
    spec: TaskSpec,
    params: Params,
}

pub struct MpMotion {
    skeleton: Skeleton,
    motion: MotionSequence,
}

/// Optimizer settings. `dct_k == 0` selects the identity prior.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpConfig {
    pub frames: usize,
    pub fps: f64,
    pub dct_k: usize,
    pub lr: f64,
    pub steps: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Non-zero applies the task's own constraint relaxation.
    pub relax: i32,
}

/// Metric values; `constraint_error` is NaN and `success` is -1 when no
/// task was given.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MpMetrics {
    pub foot_skate_ratio: f64,
    pub max_acceleration: f64,
    pub constraint_error: f64,
    pub success: i32,
    pub bone_length_incorrect_ratio: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(MpStatus, String);

impl From<TaskError> for Failure {
    fn from(e: TaskError) -> Self {
        let status = if matches!(e, TaskError::Compile { .. }) { MpStatus::Parse } else { MpStatus::Invalid };
        Failure(status, e.to_string())
    }
}

impl From<OptimError> for Failure {
    fn from(e: OptimError) -> Self {
        let status = match e {
            OptimError::NonFinite { .. } | OptimError::Eval { .. } => MpStatus::Numeric,
            _ => MpStatus::Invalid,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure(MpStatus::Invalid, e.to_string())
}

/// Runs `f`, records any failure or panic and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
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
            MpStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MpStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(MpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(MpStatus::NullArgument, format!("{what} is null")))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(MpStatus::NullArgument, format!("{what} is null")))
}

fn out<T>(p: *mut T, what: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(Failure(MpStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(p)
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn mp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mp_config_default() -> MpConfig {
    let d = OptimConfig::default();
    MpConfig { frames: 60, fps: 20.0, dct_k: 8, lr: d.lr, steps: d.steps, restarts: d.restarts, seed: 0, relax: 1 }
}

/// Looks up a corpus task by id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_task_load(id: *const c_char, out_task: *mut *mut MpTask) -> MpStatus {
    guard(|| {
        let id = text(id, "id")?;
        let dst = out(out_task, "out_task")?;
        let spec = get_task(id)?;
        *dst = Box::into_raw(Box::new(MpTask { spec, params: Params::new() }));
        Ok(())
    })
}

/// Compiles program text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_task_compile(source: *const c_char, out_task: *mut *mut MpTask) -> MpStatus {
    guard(|| {
        let src = text(source, "source")?;
        let dst = out(out_task, "out_task")?;
        let spec = TaskSpec::from_source(src, &default_skeleton())?;
        *dst = Box::into_raw(Box::new(MpTask { spec, params: Params::new() }));
        Ok(())
    })
}

/// # Safety
/// `task` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_task_free(task: *mut MpTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

/// Task name as a new string.
///
/// # Safety
/// `task` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_task_name(task: *const MpTask, out_name: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let t = get(task, "task")?;
        let dst = out(out_name, "out_name")?;
        *dst = CString::new(t.spec.id.clone()).map_err(invalid)?.into_raw();
        Ok(())
    })
}

unsafe fn set_param(task: *mut MpTask, name: *const c_char, value: ParamValue) -> MpStatus {
    guard(|| {
        let t = get_mut(task, "task")?;
        let name = text(name, "name")?;
        let mut next = t.params.clone();
        next.insert(name.to_owned(), value);
        t.spec.params(&next)?;
        t.params = next;
        Ok(())
    })
}

/// Overrides a float parameter.
///
/// # Safety
/// `task` must be a live handle and `name` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mp_task_set_float(task: *mut MpTask, name: *const c_char, value: f64) -> MpStatus {
    set_param(task, name, ParamValue::Float(value))
}

/// Overrides a vec3 parameter from three doubles.
///
/// # Safety
/// `task` must be a live handle, `name` NUL-terminated and `xyz` point to
/// three doubles.
#[no_mangle]
pub unsafe extern "C" fn mp_task_set_vec3(task: *mut MpTask, name: *const c_char, xyz: *const f64) -> MpStatus {
    if xyz.is_null() {
        set_error("xyz is null");
        return MpStatus::NullArgument;
    }
    let v = [*xyz, *xyz.add(1), *xyz.add(2)];
    set_param(task, name, ParamValue::Vec3(v))
}

/// Parses a motion JSON document.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_motion_from_json(json: *const c_char, out_motion: *mut *mut MpMotion) -> MpStatus {
    guard(|| {
        let json = text(json, "json")?;
        let dst = out(out_motion, "out_motion")?;
        let (skeleton, motion) = read_motion_json(json).map_err(invalid)?;
        *dst = Box::into_raw(Box::new(MpMotion { skeleton, motion }));
        Ok(())
    })
}

/// Serializes a motion; free the result with `mp_string_free`.
///
/// # Safety
/// `motion` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_motion_to_json(motion: *const MpMotion, out_json: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let m = get(motion, "motion")?;
        let dst = out(out_json, "out_json")?;
        *dst = CString::new(write_motion_json(&m.skeleton, &m.motion)).map_err(invalid)?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `motion` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_motion_frame_count(motion: *const MpMotion, out_frames: *mut usize) -> MpStatus {
    guard(|| {
        let m = get(motion, "motion")?;
        *out(out_frames, "out_frames")? = m.motion.frame_count();
        Ok(())
    })
}

/// # Safety
/// `motion` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_motion_free(motion: *mut MpMotion) {
    if !motion.is_null() {
        drop(Box::from_raw(motion));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Task constraint error of a motion, in meters.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mp_constraint_error(task: *const MpTask, motion: *const MpMotion, out_error: *mut f64) -> MpStatus {
    guard(|| {
        let t = get(task, "task")?;
        let m = get(motion, "motion")?;
        let dst = out(out_error, "out_error")?;
        let e = t.spec.constraint_error(&m.motion, &t.params)?;
        if !e.is_finite() {
            return Err(Failure(MpStatus::Numeric, "constraint error is not finite".into()));
        }
        *dst = e;
        Ok(())
    })
}

/// Optimizes a motion for `task` and returns it with its constraint error.
///
/// # Safety
/// `task` must be live, `config` null or valid, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn mp_optimize(
    task: *const MpTask,
    config: *const MpConfig,
    out_motion: *mut *mut MpMotion,
    out_error: *mut f64,
) -> MpStatus {
    guard(|| {
        let t = get(task, "task")?;
        let cfg = config.as_ref().copied().unwrap_or_else(|| mp_config_default());
        let dst = out(out_motion, "out_motion")?;
        let skeleton = default_skeleton();
        let prior = if cfg.dct_k == 0 { PriorSpec::Identity } else { PriorSpec::Dct { k: cfg.dct_k } };
        let prior = prior.build(&skeleton, cfg.frames, cfg.fps).map_err(invalid)?;
        let oc = OptimConfig { lr: cfg.lr, steps: cfg.steps, restarts: cfg.restarts, seed: cfg.seed, ..Default::default() };
        let relax = if cfg.relax != 0 { t.spec.relax.clone() } else { RelaxSpec::None };
        let r = relax_and_minimize(prior.as_ref(), &t.spec.program, &t.params, &relax, &oc)?;
        let motion = r.motion().clone();
        let e = t.spec.constraint_error(&motion, &t.params)?;
        if !out_error.is_null() {
            *out_error = e;
        }
        *dst = Box::into_raw(Box::new(MpMotion { skeleton, motion }));
        Ok(())
    })
}

/// Motion-quality metrics, plus task error and success when `task` is not
/// null.
///
/// # Safety
/// `motion` must be live, `task` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mp_metrics(motion: *const MpMotion, task: *const MpTask, out_metrics: *mut MpMetrics) -> MpStatus {
    guard(|| {
        let m = get(motion, "motion")?;
        let dst = out(out_metrics, "out_metrics")?;
        let cerr = match task.as_ref() {
            Some(t) => Some(t.spec.constraint_error(&m.motion, &t.params)?),
            None => None,
        };
        let r = evaluate_motion("", &m.skeleton, &m.motion, cerr, &MetricsConfig::default()).map_err(invalid)?;
        *dst = MpMetrics {
            foot_skate_ratio: r.foot_skate_ratio,
            max_acceleration: r.max_acceleration,
            constraint_error: r.constraint_error.unwrap_or(f64::NAN),
            success: r.success.map_or(-1, i32::from),
            bone_length_incorrect_ratio: r.bone_length_incorrect_ratio,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let hook = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let status = guard(|| panic!("boom"));
        std::panic::set_hook(hook);
        assert_eq!(status, MpStatus::Panic);
        let msg = unsafe { CStr::from_ptr(mp_last_error()) }.to_str().unwrap().to_owned();
        assert_eq!(msg, "internal error: boom");
    }

    #[test]
    fn interior_nul_does_not_lose_the_message() {
        set_error("a\0b");
        assert_eq!(unsafe { CStr::from_ptr(mp_last_error()) }.to_str().unwrap(), "a b");
    }

    #[test]
    fn version_is_nul_terminated() {
        assert_eq!(unsafe { CStr::from_ptr(mp_version()) }.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
