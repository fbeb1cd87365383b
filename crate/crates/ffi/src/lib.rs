//! C ABI over the core library: opaque model handles, status codes, and
//! JSON-in / JSON-out command execution, so other languages can bind
//! without touching Rust types. The header is generated by cbindgen at
//! build time into `include/carnot.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::Deserialize;

use carnot_core::cli::{self, builtin, Command, RunOptions};
use carnot_core::flags::StructureModel;

/// ABI version; bump on any breaking change to this surface.
pub const CARNOT_ABI_VERSION: u32 = 1;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarnotStatus {
    Ok = 0,
    /// The built-in example suite found a mismatch.
    ExpectationMismatch = 1,
    /// Malformed input: bad JSON, unknown names, dimension mismatches.
    InvalidInput = 2,
    /// A budget or certification failure during computation.
    ComputeFailed = 3,
    NullPointer = 4,
    InternalPanic = 5,
}

/// Opaque handle to a validated structure model.
#[repr(C)]
pub struct carnot_model {
    _private: [u8; 0],
}

struct ModelBox {
    inner: StructureModel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &carnot_core::Error) -> CarnotStatus {
    match err.exit_code() {
        2 => CarnotStatus::InvalidInput,
        _ => CarnotStatus::ComputeFailed,
    }
}

unsafe fn model_ref<'a>(model: *const carnot_model) -> Option<&'a ModelBox> {
    (model as *const ModelBox).as_ref()
}

fn boxed(inner: StructureModel) -> *mut carnot_model {
    Box::into_raw(Box::new(ModelBox { inner })) as *mut carnot_model
}

/// The ABI version compiled into the library.
#[no_mangle]
pub extern "C" fn carnot_abi_version() -> u32 {
    CARNOT_ABI_VERSION
}

/// Message for the most recent error on this thread, as a NUL-terminated
/// string owned by the library; valid until the next failing call.
#[no_mangle]
pub extern "C" fn carnot_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a JSON model document.
///
/// # Safety
/// `json` must point to a NUL-terminated string and `out` to a writable
/// pointer slot. On success `*out` owns the model; release it with
/// `carnot_model_free`.
#[no_mangle]
pub unsafe extern "C" fn carnot_model_parse_json(
    json: *const c_char,
    out: *mut *mut carnot_model,
) -> CarnotStatus {
    if json.is_null() || out.is_null() {
        return CarnotStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("model JSON is not valid UTF-8");
            return CarnotStatus::InvalidInput;
        }
    };
    match catch_unwind(AssertUnwindSafe(|| cli::parse_model(text))) {
        Ok(Ok(model)) => {
            *out = boxed(model);
            CarnotStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic while parsing the model");
            CarnotStatus::InternalPanic
        }
    }
}

/// Instantiate a built-in model by name; `k` parametrizes the
/// five-dimensional family and is ignored elsewhere.
///
/// # Safety
/// `name` must be NUL-terminated and `out` writable; see
/// `carnot_model_parse_json`.
#[no_mangle]
pub unsafe extern "C" fn carnot_model_builtin(
    name: *const c_char,
    k: u32,
    out: *mut *mut carnot_model,
) -> CarnotStatus {
    if name.is_null() || out.is_null() {
        return CarnotStatus::NullPointer;
    }
    let name = match CStr::from_ptr(name).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("model name is not valid UTF-8");
            return CarnotStatus::InvalidInput;
        }
    };
    match builtin::builtin(name, k.max(1)) {
        Some(model) => {
            *out = boxed(model);
            CarnotStatus::Ok
        }
        None => {
            set_error("unknown built-in model name");
            CarnotStatus::InvalidInput
        }
    }
}

/// Dimension of the ambient space, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn carnot_model_dim(model: *const carnot_model) -> u32 {
    match model_ref(model) {
        Some(m) => m.inner.dim() as u32,
        None => 0,
    }
}

/// Release a model handle.
///
/// # Safety
/// `model` must be null or a pointer previously returned by a constructor
/// of this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn carnot_model_free(model: *mut carnot_model) {
    if !model.is_null() {
        drop(Box::from_raw(model as *mut ModelBox));
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct OptionsJson {
    point: Option<String>,
    stratum: Option<String>,
    seed: Option<u64>,
    depth: Option<usize>,
    budget: Option<usize>,
    shells: Option<usize>,
    samples: Option<usize>,
    k: Option<u32>,
    grid: Option<String>,
    eps: Option<Vec<f64>>,
    segments: Option<usize>,
}

impl OptionsJson {
    fn into_options(self) -> RunOptions {
        let defaults = RunOptions::default();
        RunOptions {
            point: self.point,
            stratum: self.stratum,
            seed: self.seed.unwrap_or(defaults.seed),
            depth: self.depth,
            budget: self.budget,
            shells: self.shells.unwrap_or(defaults.shells),
            samples: self.samples.unwrap_or(defaults.samples),
            k: self.k.unwrap_or(defaults.k),
            grid: self.grid,
            eps_list: self.eps.unwrap_or(defaults.eps_list),
            segments: self.segments.unwrap_or(defaults.segments),
        }
    }
}

fn command_by_name(name: &str) -> Option<Command> {
    Some(match name {
        "flags" => Command::Flags,
        "strata" => Command::Strata,
        "nu" => Command::Nu,
        "rho" => Command::Rho,
        "verdict" => Command::Verdict,
        "quad" => Command::Quad,
        "ballbox" => Command::Ballbox,
        "examples" => Command::Examples,
        _ => return None,
    })
}

/// Run a command against a model and return the full JSON report.
///
/// `command` is one of `flags|strata|nu|rho|verdict|quad|ballbox|examples`;
/// `options_json` may be null or a JSON object with the same option names
/// as the CLI flags. `model` may be null only for `examples`.
///
/// # Safety
/// Pointer arguments must be null or valid NUL-terminated strings / live
/// handles; `out_report` must be writable. On success `*out_report` owns a
/// NUL-terminated JSON document; release it with `carnot_string_free`.
#[no_mangle]
pub unsafe extern "C" fn carnot_run_json(
    model: *const carnot_model,
    command: *const c_char,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
) -> CarnotStatus {
    if command.is_null() || out_report.is_null() {
        return CarnotStatus::NullPointer;
    }
    let command = match CStr::from_ptr(command).to_str().ok().and_then(command_by_name) {
        Some(c) => c,
        None => {
            set_error("unknown command");
            return CarnotStatus::InvalidInput;
        }
    };
    let opts = if options_json.is_null() {
        RunOptions::default()
    } else {
        let text = match CStr::from_ptr(options_json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("options JSON is not valid UTF-8");
                return CarnotStatus::InvalidInput;
            }
        };
        match serde_json::from_str::<OptionsJson>(text) {
            Ok(o) => o.into_options(),
            Err(e) => {
                set_error(&format!("options JSON: {e}"));
                return CarnotStatus::InvalidInput;
            }
        }
    };
    let model = model_ref(model).map(|m| &m.inner);
    if model.is_none() && command != Command::Examples {
        set_error("a model handle is required for this command");
        return CarnotStatus::NullPointer;
    }
    let outcome = catch_unwind(AssertUnwindSafe(|| cli::run(command, model, &opts)));
    match outcome {
        Ok(Ok(report)) => {
            let mismatch = command == Command::Examples
                && !report.results["all_pass"].as_bool().unwrap_or(false);
            let payload = report.to_json_pretty();
            let cstr = CString::new(payload).unwrap_or_default();
            *out_report = cstr.into_raw();
            if mismatch {
                set_error("example suite expectations mismatched");
                CarnotStatus::ExpectationMismatch
            } else {
                CarnotStatus::Ok
            }
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic while running the command");
            CarnotStatus::InternalPanic
        }
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library, not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn carnot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
