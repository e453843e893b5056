//! C interface to the synthesizer.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `_free` function. Every function returns a
//! [`SyrecStatus`] or a value that has an obvious "nothing" (null, 0). On
//! failure a message is available from [`syrec_last_error_message`] on the
//! same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use syrec::frontend::ElabSettings;
use syrec::synth::simulate_program;
use syrec::{compile, emit_real, synthesize, SignalState, SynthSettings, SynthesisMode, SynthesisResult};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyrecStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    CompileError = 3,
    SynthesisError = 4,
    InvalidInput = 5,
    UnknownSignal = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyrecMode {
    CostAware = 0,
    LineAware = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SyrecStats {
    pub lines: usize,
    pub constants: usize,
    pub garbage: usize,
    pub gates: usize,
    pub quantum_cost: u64,
}

/// A synthesized circuit together with its signal binding.
pub struct SyrecCircuit {
    result: SynthesisResult,
}

/// Named values produced by [`syrec_simulate`].
pub struct SyrecValues {
    entries: Vec<(CString, u64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, turning a panic into [`SyrecStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (SyrecStatus, String)>) -> SyrecStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SyrecStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error (panic)");
            SyrecStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SyrecStatus, String)> {
    if p.is_null() {
        return Err((SyrecStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SyrecStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn null(what: &str) -> (SyrecStatus, String) {
    (SyrecStatus::NullArgument, format!("{what} is null"))
}

/// Compiles and synthesizes `source`. On success `*out` receives a new
/// circuit handle; on failure it is set to null.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn syrec_compile(source: *const c_char, mode: SyrecMode, out: *mut *mut SyrecCircuit) -> SyrecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let src = str_arg(source, "source")?;
        let program = compile(src, &ElabSettings::default())
            .map_err(|d| (SyrecStatus::CompileError, d.render("<source>").trim_end().to_string()))?;
        let mode = match mode {
            SyrecMode::CostAware => SynthesisMode::CostAware,
            SyrecMode::LineAware => SynthesisMode::LineAware,
        };
        let result = synthesize(&program, mode, &SynthSettings::default())
            .map_err(|e| (SyrecStatus::SynthesisError, e.to_string()))?;
        *out = Box::into_raw(Box::new(SyrecCircuit { result }));
        Ok(())
    })
}

/// Releases a circuit. Null is ignored.
///
/// # Safety
/// `circuit` must come from [`syrec_compile`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn syrec_circuit_free(circuit: *mut SyrecCircuit) {
    if !circuit.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(circuit))));
    }
}

/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn syrec_circuit_stats(circuit: *const SyrecCircuit, out: *mut SyrecStats) -> SyrecStatus {
    guard(|| {
        let c = circuit.as_ref().ok_or_else(|| null("circuit"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = &c.result.stats;
        *out = SyrecStats {
            lines: s.line_count,
            constants: s.constant_line_count,
            garbage: s.garbage_count,
            gates: s.gate_count,
            quantum_cost: s.quantum_cost,
        };
        Ok(())
    })
}

/// Writes the circuit in `.real` format to a new string in `*out`, to be
/// released with [`syrec_string_free`].
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn syrec_circuit_real(circuit: *const SyrecCircuit, out: *mut *mut c_char) -> SyrecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = circuit.as_ref().ok_or_else(|| null("circuit"))?;
        let text = CString::new(emit_real(&c.result.circuit)).expect("no NUL in .real text");
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn syrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Simulates the circuit with `count` named inputs. Every `in`, `inout`
/// and `state` signal must be given. `*out` receives the values of all
/// non-wire signals after the circuit ran.
///
/// # Safety
/// `names` and `values` must point to `count` elements each (or may be
/// null when `count` is 0); each name must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn syrec_simulate(
    circuit: *const SyrecCircuit,
    names: *const *const c_char,
    values: *const u64,
    count: usize,
    out: *mut *mut SyrecValues,
) -> SyrecStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let c = circuit.as_ref().ok_or_else(|| null("circuit"))?;
        if count > 0 && (names.is_null() || values.is_null()) {
            return Err(null("names or values"));
        }
        let mut inputs = SignalState::new();
        for i in 0..count {
            let name = str_arg(*names.add(i), "input name")?;
            inputs.set(name, *values.add(i));
        }
        let state = simulate_program(&c.result, &inputs).map_err(|e| (SyrecStatus::InvalidInput, e.to_string()))?;
        let entries = state
            .iter()
            .map(|(n, v)| (CString::new(n).expect("identifiers have no NUL"), v))
            .collect();
        *out = Box::into_raw(Box::new(SyrecValues { entries }));
        Ok(())
    })
}

/// Number of entries, 0 for null.
///
/// # Safety
/// `values` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn syrec_values_len(values: *const SyrecValues) -> usize {
    values.as_ref().map_or(0, |v| v.entries.len())
}

/// Name of entry `index`, borrowed from the handle. Null when out of range.
///
/// # Safety
/// `values` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn syrec_values_name(values: *const SyrecValues, index: usize) -> *const c_char {
    values
        .as_ref()
        .and_then(|v| v.entries.get(index))
        .map_or(ptr::null(), |(n, _)| n.as_ptr())
}

/// Looks a signal up by name.
///
/// # Safety
/// `values` must be a live handle, `name` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn syrec_values_get(values: *const SyrecValues, name: *const c_char, out: *mut u64) -> SyrecStatus {
    guard(|| {
        let v = values.as_ref().ok_or_else(|| null("values"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let name = str_arg(name, "name")?;
        let (_, value) = v
            .entries
            .iter()
            .find(|(n, _)| n.as_bytes() == name.as_bytes())
            .ok_or_else(|| (SyrecStatus::UnknownSignal, format!("no signal named {name}")))?;
        *out = *value;
        Ok(())
    })
}

/// # Safety
/// `values` must come from [`syrec_simulate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn syrec_values_free(values: *mut SyrecValues) {
    if !values.is_null() {
        drop(Box::from_raw(values));
    }
}

/// Message for the most recent failure on this thread, or null. The
/// pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn syrec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn syrec_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
