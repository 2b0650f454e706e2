//! C ABI over `bco-core`.
//!
//! Every function returns a [`BcoStatus`]; on failure a description is kept
//! per thread and can be read with [`bco_last_error_message`]. Handles are
//! opaque and must be released with their matching `*_free` function.
//! Coordinates cross the boundary as `(pointer, length)` pairs whose length
//! must equal the handle's dimension.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bco_core::envs::{io as env_io, EnvError, LossSequence, DOMAIN_TOL};
use bco_core::geometry::{DomainSpec, Point};
use bco_core::harness::{self, config::ConfigError, emit, HarnessError, RunConfig};
use bco_core::random::{stream, RandomStream, StreamId};
use bco_core::tewa::{Tewa, TewaConfig, TewaError};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A point lies outside the domain or a round outside the horizon.
    OutOfDomain = 3,
    /// Calls made in the wrong order, such as two queries without feedback.
    InvalidState = 4,
    Io = 5,
    Parse = 6,
    /// A panic was caught at the boundary.
    Internal = 7,
}

/// Domain shape selector for [`bco_tewa_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcoDomain {
    /// Euclidean ball of the given radius about the origin.
    Ball = 0,
    /// Cube `[−w, w]^d` with the given half-width.
    Cube = 1,
}

/// A TEWA learner together with its private random stream.
pub struct BcoTewa {
    learner: Tewa,
    rng: RandomStream,
}

/// A loss sequence loaded from a file.
pub struct BcoEnv {
    env: LossSequence,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(BcoStatus, String);

impl Failure {
    fn new(status: BcoStatus, message: impl Into<String>) -> Self {
        Failure(status, message.into())
    }
}

impl From<TewaError> for Failure {
    fn from(e: TewaError) -> Self {
        let status = match e {
            TewaError::QueryPending | TewaError::NoPendingQuery | TewaError::HorizonExhausted(_) => {
                BcoStatus::InvalidState
            }
            TewaError::InvalidConfig(_) | TewaError::Geometry(_) | TewaError::NonFiniteFeedback(_) => {
                BcoStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        let status = match e {
            EnvError::OutOfDomain { .. } | EnvError::RoundOutOfRange { .. } => BcoStatus::OutOfDomain,
            EnvError::Io { .. } => BcoStatus::Io,
            EnvError::Parse(_) => BcoStatus::Parse,
            _ => BcoStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Learner(e) => e.into(),
            HarnessError::Env(e) => e.into(),
            HarnessError::Io { .. } => Failure(BcoStatus::Io, e.to_string()),
            HarnessError::Config { .. } | HarnessError::Tuning(_) => Failure(BcoStatus::InvalidArgument, e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let status = match e {
            ConfigError::Syntax { .. } => BcoStatus::Parse,
            _ => BcoStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, records any failure for [`bco_last_error_message`] and turns
/// panics into [`BcoStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BcoStatus {
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".to_string());
        Err(Failure::new(BcoStatus::Internal, msg))
    });
    match result {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            BcoStatus::Ok
        }
        Err(Failure(status, message)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = message);
            status
        }
    }
}

unsafe fn handle_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(BcoStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(BcoStatus::NullPointer, format!("{name} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(BcoStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(BcoStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn read_point(p: *const f64, len: usize, dim: usize) -> Result<Point, Failure> {
    if p.is_null() {
        return Err(Failure::new(BcoStatus::NullPointer, "coordinate pointer is null"));
    }
    if len != dim {
        return Err(Failure::new(BcoStatus::InvalidArgument, format!("expected {dim} coordinates, got {len}")));
    }
    Ok(Point::new(std::slice::from_raw_parts(p, len).to_vec()))
}

unsafe fn write_point(x: &Point, out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(BcoStatus::NullPointer, "output buffer is null"));
    }
    if len != x.dim() {
        return Err(Failure::new(BcoStatus::InvalidArgument, format!("buffer holds {len} values, need {}", x.dim())));
    }
    ptr::copy_nonoverlapping(x.coords().as_ptr(), out, len);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns the full length including
/// the terminator. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bco_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bco_status_string(status: BcoStatus) -> *const c_char {
    let s: &'static CStr = match status {
        BcoStatus::Ok => c"ok",
        BcoStatus::NullPointer => c"null pointer",
        BcoStatus::InvalidArgument => c"invalid argument",
        BcoStatus::OutOfDomain => c"out of domain",
        BcoStatus::InvalidState => c"invalid state",
        BcoStatus::Io => c"i/o error",
        BcoStatus::Parse => c"parse error",
        BcoStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Creates a learner on a ball or cube centered at the origin.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by
/// the caller.
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_new(
    dim: usize,
    horizon: u64,
    interval_len: u64,
    sigma: f64,
    domain: BcoDomain,
    size: f64,
    seed: u64,
    out: *mut *mut BcoTewa,
) -> BcoStatus {
    guard(|| {
        let out = handle_mut(out, "out")?;
        *out = ptr::null_mut();
        if dim == 0 {
            return Err(Failure::new(BcoStatus::InvalidArgument, "dimension must be positive"));
        }
        let domain = match domain {
            BcoDomain::Ball => DomainSpec::ball(Point::zeros(dim), size),
            BcoDomain::Cube => Ok(DomainSpec::cube(dim, size)),
        }
        .map_err(TewaError::from)?;
        domain.validate().map_err(TewaError::from)?;
        let learner = Tewa::new(TewaConfig { dim, horizon, interval_len, sigma, domain })?;
        *out = Box::into_raw(Box::new(BcoTewa { learner, rng: stream(seed, StreamId::Learner) }));
        Ok(())
    })
}

/// Writes the next query point into `out` (`len` = dimension).
///
/// # Safety
/// `tewa` must come from [`bco_tewa_new`]; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_next_query(tewa: *mut BcoTewa, out: *mut f64, len: usize) -> BcoStatus {
    guard(|| {
        let h = handle_mut(tewa, "tewa")?;
        // check the buffer first so that a bad call leaves no query pending
        write_point(&Point::zeros(h.learner.config().dim), out, len)?;
        let z = h.learner.propose(&mut h.rng)?.clone();
        write_point(&z, out, len)
    })
}

/// Reports the observed loss at the pending query.
///
/// # Safety
/// `tewa` must come from [`bco_tewa_new`].
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_feed(tewa: *mut BcoTewa, loss: f64) -> BcoStatus {
    guard(|| {
        let h = handle_mut(tewa, "tewa")?;
        h.learner.update(loss)?;
        Ok(())
    })
}

/// Writes the most recent aggregate action into `out`.
///
/// # Safety
/// `tewa` must come from [`bco_tewa_new`]; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_meta_action(tewa: *const BcoTewa, out: *mut f64, len: usize) -> BcoStatus {
    guard(|| {
        let h = handle_ref(tewa, "tewa")?;
        write_point(h.learner.meta_action(), out, len)
    })
}

/// Number of completed rounds.
///
/// # Safety
/// `tewa` must come from [`bco_tewa_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_rounds(tewa: *const BcoTewa, out: *mut u64) -> BcoStatus {
    guard(|| {
        let h = handle_ref(tewa, "tewa")?;
        *handle_mut(out, "out")? = h.learner.round_index() - 1;
        Ok(())
    })
}

/// Releases a learner. Null is ignored.
///
/// # Safety
/// `tewa` must be null or come from [`bco_tewa_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn bco_tewa_free(tewa: *mut BcoTewa) {
    if !tewa.is_null() {
        drop(Box::from_raw(tewa));
    }
}

/// Loads and validates an environment file written by `bco env export`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bco_env_load(path: *const c_char, out: *mut *mut BcoEnv) -> BcoStatus {
    guard(|| {
        let out = handle_mut(out, "out")?;
        *out = ptr::null_mut();
        let env = env_io::import(Path::new(c_str(path, "path")?))?;
        *out = Box::into_raw(Box::new(BcoEnv { env }));
        Ok(())
    })
}

/// Horizon and dimension of an environment; either output may be null.
///
/// # Safety
/// `env` must come from [`bco_env_load`].
#[no_mangle]
pub unsafe extern "C" fn bco_env_shape(env: *const BcoEnv, horizon: *mut u64, dim: *mut usize) -> BcoStatus {
    guard(|| {
        let e = &handle_ref(env, "env")?.env;
        if let Some(h) = horizon.as_mut() {
            *h = e.horizon;
        }
        if let Some(d) = dim.as_mut() {
            *d = e.d;
        }
        Ok(())
    })
}

/// Noise-free loss `f_t(x)`; fails with `OutOfDomain` outside the domain.
///
/// # Safety
/// `env` must come from [`bco_env_load`]; `x` must hold `len` doubles and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bco_env_eval(
    env: *const BcoEnv,
    t: u64,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> BcoStatus {
    guard(|| {
        let e = &handle_ref(env, "env")?.env;
        let out = handle_mut(out, "out")?;
        let x = read_point(x, len, e.d)?;
        let margin = e.domain.boundary_margin(&x);
        if margin < -DOMAIN_TOL {
            return Err(EnvError::OutOfDomain { t, margin }.into());
        }
        *out = e.value(t, &x)?;
        Ok(())
    })
}

/// Minimizer of `f_t` over the domain.
///
/// # Safety
/// `env` must come from [`bco_env_load`]; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bco_env_minimizer(env: *const BcoEnv, t: u64, out: *mut f64, len: usize) -> BcoStatus {
    guard(|| {
        let e = &handle_ref(env, "env")?.env;
        write_point(e.minimizer(t)?, out, len)
    })
}

/// Releases an environment. Null is ignored.
///
/// # Safety
/// `env` must be null or come from [`bco_env_load`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn bco_env_free(env: *mut BcoEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Runs a complete experiment described by `key = value` text (the same
/// format as `bco run --config`). When `csv_path` is non-null the trace and
/// its JSON summary are written next to each other. `final_regret` may be
/// null.
///
/// # Safety
/// `config` must be a NUL-terminated string; `csv_path` must be null or
/// NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bco_run_config(
    config: *const c_char,
    csv_path: *const c_char,
    final_regret: *mut f64,
) -> BcoStatus {
    guard(|| {
        let text = c_str(config, "config")?;
        let pairs = harness::parse_config_text(text)?;
        let mut cfg = RunConfig::default();
        harness::apply_overrides(&mut cfg, pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        let result = harness::run(&cfg)?;
        if !csv_path.is_null() {
            let path = Path::new(c_str(csv_path, "csv_path")?);
            emit::write_csv(&result.trace, path)?;
            emit::write_summary(&result, &path.with_extension("json"))?;
        }
        if let Some(r) = final_regret.as_mut() {
            *r = result.trace.final_regret_dyn();
        }
        Ok(())
    })
}
