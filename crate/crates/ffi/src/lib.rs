//! C ABI for the guardsim workbench: opaque handles, status codes, and a
//! per-thread last-error message.
//!
//! Handles (`GsConfig`, `GsModel`, `GsRun`) are created and freed by this
//! library; callers treat them as opaque pointers. Every function returns a
//! `GsStatus`; on any non-OK status, `gs_last_error` yields a message valid
//! until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs;
use std::path::Path;

use guardsim::agents::{Action, QTable};
use guardsim::config::RunConfig;
use guardsim::engine;
use guardsim::metrics::RunMetrics;
use guardsim::oversight::{self, DecisionLog};
use guardsim::reports;
use guardsim::traffic::TrafficClass;

/// Result code of every API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Io = 4,
    Parse = 5,
    RunFailed = 6,
}

/// Scalar metrics retrievable from a finished run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsMetric {
    DetectionRate = 0,
    FalsePositiveRate = 1,
    Ecs = 2,
    Auc = 3,
}

/// Opaque run configuration.
pub struct GsConfig {
    inner: RunConfig,
}

/// Opaque trained model (the Q-table).
pub struct GsModel {
    inner: QTable,
}

/// Opaque finished evaluation run: metrics plus the full decision log.
pub struct GsRun {
    metrics: RunMetrics,
    log: DecisionLog,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: GsStatus, message: impl AsRef<str>) -> GsStatus {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, GsStatus> {
    if ptr.is_null() {
        return Err(fail(GsStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(GsStatus::InvalidArgument, "string argument is not utf-8"))
}

unsafe fn out_arg<'a, T>(ptr: *mut T) -> Result<&'a mut T, GsStatus> {
    if ptr.is_null() {
        return Err(fail(GsStatus::NullArgument, "null output pointer"));
    }
    Ok(&mut *ptr)
}

unsafe fn ref_arg<'a, T>(ptr: *const T) -> Result<&'a T, GsStatus> {
    if ptr.is_null() {
        return Err(fail(GsStatus::NullArgument, "null handle"));
    }
    Ok(&*ptr)
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next API call from the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a configuration with the documented defaults.
///
/// # Safety
/// `out` must be a valid pointer to a `GsConfig*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_config_new(out: *mut *mut GsConfig) -> GsStatus {
    let Ok(out) = out_arg(out) else {
        return GsStatus::NullArgument;
    };
    *out = Box::into_raw(Box::new(GsConfig {
        inner: RunConfig::default(),
    }));
    GsStatus::Ok
}

/// Load a key=value config file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid `GsConfig*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_config_load(path: *const c_char, out: *mut *mut GsConfig) -> GsStatus {
    let (path, out) = match (str_arg(path), out_arg(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    match RunConfig::load(Path::new(path)) {
        Ok(config) => {
            *out = Box::into_raw(Box::new(GsConfig { inner: config }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::InvalidConfig, e.to_string()),
    }
}

/// Set one config key (same keys as the config file).
///
/// # Safety
/// `config` must be a live handle from this library; `key` and `value`
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn gs_config_set(
    config: *mut GsConfig,
    key: *const c_char,
    value: *const c_char,
) -> GsStatus {
    if config.is_null() {
        return fail(GsStatus::NullArgument, "null config handle");
    }
    let (key, value) = match (str_arg(key), str_arg(value)) {
        (Ok(k), Ok(v)) => (k, v),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    match (*config).inner.set(key, value) {
        Ok(()) => GsStatus::Ok,
        Err(e) => fail(GsStatus::InvalidConfig, e.to_string()),
    }
}

/// Release a config handle. Passing NULL is a no-op.
///
/// # Safety
/// `config` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_config_free(config: *mut GsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Train the learning agent under `config` and return the trained model.
///
/// # Safety
/// `config` must be a live handle; `out` a valid `GsModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_train(config: *const GsConfig, out: *mut *mut GsModel) -> GsStatus {
    let (config, out) = match (ref_arg(config), out_arg(out)) {
        (Ok(c), Ok(o)) => (c, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let run_id = format!("ffi_train_seed{}", config.inner.seed);
    match engine::train(&config.inner, &run_id) {
        Ok(run) => {
            *out = Box::into_raw(Box::new(GsModel {
                inner: run.trace.final_q,
            }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::RunFailed, e.to_string()),
    }
}

/// Load a model from a Q-table file produced by `gs_model_save` or the CLI.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid `GsModel*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_model_load(path: *const c_char, out: *mut *mut GsModel) -> GsStatus {
    let (path, out) = match (str_arg(path), out_arg(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let content = match fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) => return fail(GsStatus::Io, format!("{path}: {e}")),
    };
    match reports::parse_qtable_file(&content) {
        Ok(q) => {
            *out = Box::into_raw(Box::new(GsModel { inner: q }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::Parse, format!("{path}: {e}")),
    }
}

/// Write the model in the fixed Q-table file layout.
///
/// # Safety
/// `model` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gs_model_save(model: *const GsModel, path: *const c_char) -> GsStatus {
    let (model, path) = match (ref_arg(model), str_arg(path)) {
        (Ok(m), Ok(p)) => (m, p),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    match fs::write(path, reports::qtable_file_text(&model.inner)) {
        Ok(()) => GsStatus::Ok,
        Err(e) => fail(GsStatus::Io, format!("{path}: {e}")),
    }
}

/// Read one Q-value. Class indices: 0 normal, 1 phishing, 2 ransomware,
/// 3 ddos. Action indices: 0 allow, 1 block.
///
/// # Safety
/// `model` must be a live handle; `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn gs_model_q_value(
    model: *const GsModel,
    class_index: u32,
    action_index: u32,
    out: *mut f64,
) -> GsStatus {
    let (model, out) = match (ref_arg(model), out_arg(out)) {
        (Ok(m), Ok(o)) => (m, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let Some(class) = TrafficClass::from_index(class_index as usize) else {
        return fail(GsStatus::InvalidArgument, "class index out of range");
    };
    let Some(action) = Action::ALL.get(action_index as usize) else {
        return fail(GsStatus::InvalidArgument, "action index out of range");
    };
    *out = model.inner.get(class, *action);
    GsStatus::Ok
}

/// Release a model handle. Passing NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_model_free(model: *mut GsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluate a trained model on the unseen evaluation stream of `config`.
///
/// # Safety
/// `config` and `model` must be live handles; `out` a valid `GsRun*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_evaluate(
    config: *const GsConfig,
    model: *const GsModel,
    out: *mut *mut GsRun,
) -> GsStatus {
    let (config, model, out) = match (ref_arg(config), ref_arg(model), out_arg(out)) {
        (Ok(c), Ok(m), Ok(o)) => (c, m, o),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return e,
    };
    let run_id = format!("ffi_eval_seed{}", config.inner.seed);
    match engine::evaluate(&config.inner, &model.inner, &run_id) {
        Ok(run) => {
            *out = Box::into_raw(Box::new(GsRun {
                metrics: run.metrics,
                log: run.log,
            }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::RunFailed, e.to_string()),
    }
}

/// Evaluate the rule-based baseline under `config`.
///
/// # Safety
/// `config` must be a live handle; `out` a valid `GsRun*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_baseline(config: *const GsConfig, out: *mut *mut GsRun) -> GsStatus {
    let (config, out) = match (ref_arg(config), out_arg(out)) {
        (Ok(c), Ok(o)) => (c, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let run_id = format!("ffi_baseline_seed{}", config.inner.seed);
    match engine::evaluate_baseline(&config.inner, &run_id) {
        Ok(run) => {
            *out = Box::into_raw(Box::new(GsRun {
                metrics: run.metrics,
                log: run.log,
            }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::RunFailed, e.to_string()),
    }
}

/// Recompute metrics from an exported decision-log CSV (replay audit).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid `GsRun*` slot.
#[no_mangle]
pub unsafe extern "C" fn gs_replay(path: *const c_char, out: *mut *mut GsRun) -> GsStatus {
    let (path, out) = match (str_arg(path), out_arg(out)) {
        (Ok(p), Ok(o)) => (p, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    let content = match fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) => return fail(GsStatus::Io, format!("{path}: {e}")),
    };
    let log = match oversight::import_csv_str(&content) {
        Ok(log) => log,
        Err(e) => return fail(GsStatus::Parse, format!("{path}: {e}")),
    };
    match oversight::replay(&log) {
        Ok(metrics) => {
            *out = Box::into_raw(Box::new(GsRun { metrics, log }));
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::RunFailed, format!("{path}: {e}")),
    }
}

/// Read one scalar metric from a run.
///
/// # Safety
/// `run` must be a live handle; `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn gs_run_metric(
    run: *const GsRun,
    metric: GsMetric,
    out: *mut f64,
) -> GsStatus {
    let (run, out) = match (ref_arg(run), out_arg(out)) {
        (Ok(r), Ok(o)) => (r, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    *out = match metric {
        GsMetric::DetectionRate => run.metrics.detection_rate,
        GsMetric::FalsePositiveRate => run.metrics.false_positive_rate,
        GsMetric::Ecs => run.metrics.ecs,
        GsMetric::Auc => run.metrics.auc,
    };
    GsStatus::Ok
}

/// Read the confusion counts from a run. Any output pointer may be NULL to
/// skip that count.
///
/// # Safety
/// `run` must be a live handle; non-NULL outputs must be valid u64 slots.
#[no_mangle]
pub unsafe extern "C" fn gs_run_counts(
    run: *const GsRun,
    tp: *mut u64,
    fp: *mut u64,
    tn: *mut u64,
    fn_: *mut u64,
) -> GsStatus {
    let run = match ref_arg(run) {
        Ok(r) => r,
        Err(e) => return e,
    };
    let c = run.metrics.confusion;
    for (slot, value) in [
        (tp, c.true_positives),
        (fp, c.false_positives),
        (tn, c.true_negatives),
        (fn_, c.false_negatives),
    ] {
        if !slot.is_null() {
            *slot = value;
        }
    }
    GsStatus::Ok
}

/// Number of events in the run.
///
/// # Safety
/// `run` must be a live handle; `out` a valid u64 slot.
#[no_mangle]
pub unsafe extern "C" fn gs_run_events(run: *const GsRun, out: *mut u64) -> GsStatus {
    let (run, out) = match (ref_arg(run), out_arg(out)) {
        (Ok(r), Ok(o)) => (r, o),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    *out = run.metrics.events;
    GsStatus::Ok
}

/// Export the run's decision log in the fixed CSV format.
///
/// # Safety
/// `run` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gs_run_write_csv(run: *const GsRun, path: *const c_char) -> GsStatus {
    let (run, path) = match (ref_arg(run), str_arg(path)) {
        (Ok(r), Ok(p)) => (r, p),
        (Err(e), _) | (_, Err(e)) => return e,
    };
    match fs::write(path, oversight::export_csv_string(&run.log)) {
        Ok(()) => GsStatus::Ok,
        Err(e) => fail(GsStatus::Io, format!("{path}: {e}")),
    }
}

/// Release a run handle. Passing NULL is a no-op.
///
/// # Safety
/// `run` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_run_free(run: *mut GsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
