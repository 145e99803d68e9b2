//! C ABI for the stochwave simulator.
//!
//! Every entry point returns an [`SwStatus`]; on failure a message is kept in
//! thread-local storage and can be copied out with [`sw_last_error_message`].
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stochwave::circle_kernel::{circle_kernel, kernel_space_integral};
use stochwave::harness::sweep::{run_sweep, SweepResult};
use stochwave::harness::{wilson_interval, ExperimentConfig, Z95};
use stochwave::solver::{run_path, PathRecord, RunOptions};
use stochwave::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Domain = 4,
    OutOfRange = 5,
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> SwStatus {
    match err {
        Error::Config(_) | Error::MemoryGuard(_) | Error::Shape { .. } => SwStatus::Config,
        Error::Domain(_) | Error::Precondition(_) | Error::TooFewLags(_) => SwStatus::Domain,
        Error::HistoryTooShort { .. } | Error::NoCrossing(_) => SwStatus::OutOfRange,
        Error::DeadState => SwStatus::Numerical,
        Error::Io(_) | Error::Json(_) => SwStatus::Io,
    }
}

fn fail(status: SwStatus, msg: impl Into<String>) -> SwStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SwStatus>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SwStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(SwStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: stochwave::Result<T>) -> Result<T, SwStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SwStatus> {
    if p.is_null() {
        Err(fail(SwStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque experiment configuration.
pub struct SwConfig {
    inner: ExperimentConfig,
}

/// Opaque record of one simulated path.
pub struct SwPath {
    record: PathRecord,
}

/// Opaque result of an alpha sweep.
pub struct SwSweep {
    result: SweepResult,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwSweepRow {
    pub alpha: f64,
    pub n_paths: usize,
    pub n_hit: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_tau: f64,
    pub invalid_count: usize,
}

/// Parses a `key = value` config; a null `text` yields the defaults.
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_config_parse(text: *const c_char, out: *mut *mut SwConfig) -> SwStatus {
    guard(|| {
        non_null(out, "out")?;
        let cfg = if text.is_null() {
            ExperimentConfig::default()
        } else {
            let s = CStr::from_ptr(text).to_str().map_err(|_| fail(SwStatus::InvalidUtf8, "config text is not UTF-8"))?;
            lib(ExperimentConfig::parse(s))?
        };
        *out = Box::into_raw(Box::new(SwConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`sw_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sw_config_free(cfg: *mut SwConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Overrides the number of paths per alpha.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set_n_paths(cfg: *mut SwConfig, n_paths: usize) -> SwStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        if n_paths == 0 {
            return Err(fail(SwStatus::Config, "n_paths must be at least 1"));
        }
        (*cfg).inner.n_paths = n_paths;
        Ok(())
    })
}

/// Replaces the sweep's alpha list.
///
/// # Safety
/// `cfg` must be a live handle and `alphas` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sw_config_set_alpha_list(cfg: *mut SwConfig, alphas: *const f64, len: usize) -> SwStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(alphas, "alphas")?;
        let list = std::slice::from_raw_parts(alphas, len).to_vec();
        let mut next = (*cfg).inner.clone();
        next.alpha_list = list;
        if next.alpha_list.is_empty() {
            return Err(fail(SwStatus::Config, "alpha list is empty"));
        }
        lib(next.validate())?;
        (*cfg).inner = next;
        Ok(())
    })
}

/// Simulates one path at `alpha` with the given seed.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_run_path(cfg: *const SwConfig, alpha: f64, seed: u64, out: *mut *mut SwPath) -> SwStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        let c = &(*cfg).inner;
        let grid = lib(c.grid())?;
        let params = lib(c.params(alpha))?;
        let init = lib(c.initial_data(&grid))?;
        let opts = RunOptions { record_history: false, ..c.run_options() };
        let run = lib(run_path(&params, &init, &grid, seed, &opts))?;
        *out = Box::into_raw(Box::new(SwPath { record: run.record }));
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_path_free(path: *mut SwPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Scalar outcome of a path.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwPathSummary {
    pub seed: u64,
    pub alpha: f64,
    pub hit: bool,
    pub tau_hat: f64,
    pub min_over_run: f64,
    pub singular_integral: f64,
    pub log_weight: f64,
    pub invalid: bool,
    pub steps: usize,
}

/// # Safety
/// `path` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_path_summary(path: *const SwPath, out: *mut SwPathSummary) -> SwStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let r = &(*path).record;
        *out = SwPathSummary {
            seed: r.seed,
            alpha: r.alpha,
            hit: r.hit,
            tau_hat: r.tau_hat,
            min_over_run: r.min_over_run(),
            singular_integral: r.singular_integral,
            log_weight: r.log_weight,
            invalid: r.invalid,
            steps: r.last_step,
        };
        Ok(())
    })
}

/// Copies up to `len` per-step minima into `buf`; `*written` receives the
/// number copied. Pass a null `buf` to query the count.
///
/// # Safety
/// `path` must be a live handle, `buf` null or `len` writable doubles,
/// `written` writable.
#[no_mangle]
pub unsafe extern "C" fn sw_path_minima(path: *const SwPath, buf: *mut f64, len: usize, written: *mut usize) -> SwStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(written, "written")?;
        let m = &(*path).record.minima;
        if buf.is_null() {
            *written = m.len();
            return Ok(());
        }
        let n = m.len().min(len);
        std::ptr::copy_nonoverlapping(m.as_ptr(), buf, n);
        *written = n;
        Ok(())
    })
}

/// Runs the configured sweep on `workers` threads (0 = available parallelism).
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_run_sweep(cfg: *const SwConfig, workers: usize, out: *mut *mut SwSweep) -> SwStatus {
    guard(|| {
        non_null(cfg, "cfg")?;
        non_null(out, "out")?;
        let workers = if workers == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { workers };
        let result = lib(run_sweep(&(*cfg).inner, workers))?;
        *out = Box::into_raw(Box::new(SwSweep { result }));
        Ok(())
    })
}

/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_free(sweep: *mut SwSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Number of alpha rows; 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_len(sweep: *const SwSweep) -> usize {
    if sweep.is_null() {
        0
    } else {
        (*sweep).result.rows.len()
    }
}

/// # Safety
/// `sweep` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_sweep_row(sweep: *const SwSweep, index: usize, out: *mut SwSweepRow) -> SwStatus {
    guard(|| {
        non_null(sweep, "sweep")?;
        non_null(out, "out")?;
        let rows = &(*sweep).result.rows;
        let r = rows
            .get(index)
            .ok_or_else(|| fail(SwStatus::OutOfRange, format!("row {index} out of range ({} rows)", rows.len())))?;
        *out = SwSweepRow {
            alpha: r.alpha,
            n_paths: r.n_paths,
            n_hit: r.n_hit,
            p_hat: r.p_hat,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            mean_tau: r.mean_tau,
            invalid_count: r.invalid_count,
        };
        Ok(())
    })
}

/// Periodic wave kernel `S_I(t, x)` on a circle of length `length`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_circle_kernel(t: f64, x: f64, length: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(circle_kernel(t, x, length))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_kernel_space_integral(t: f64, length: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(kernel_space_integral(t, length))?;
        Ok(())
    })
}

/// 95% Wilson interval for `k` successes out of `n`.
///
/// # Safety
/// `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_wilson_interval(k: usize, n: usize, lo: *mut f64, hi: *mut f64) -> SwStatus {
    guard(|| {
        non_null(lo, "lo")?;
        non_null(hi, "hi")?;
        if k > n {
            return Err(fail(SwStatus::Domain, format!("k = {k} exceeds n = {n}")));
        }
        let (a, b) = wilson_interval(k, n, Z95);
        *lo = a;
        *hi = b;
        Ok(())
    })
}
