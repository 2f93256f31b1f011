//! C ABI over `fockforge`.
//!
//! Models and states are opaque heap handles released with their `_free`
//! functions. Every call returns an [`FfStatus`]; on failure the message is
//! available through [`ff_last_error`] on the same thread. Strings are
//! NUL-terminated UTF-8. Output strings are written into caller buffers; a
//! too-small buffer yields `FF_BUFFER_TOO_SMALL` with the required size
//! (including the NUL) in `*needed`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fockforge::cli::{format_state, parse_state};
use fockforge::enumerator::{gate_count, Enumerator};
use fockforge::fock::{BitLayout, Bits, Cutoffs, FockState, Quantization};
use fockforge::model::{builtin_with, parse_model, ModelSpec};
use fockforge::Error;

/// Status codes returned by every function.
#[allow(non_camel_case_types)]
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfStatus {
    FF_OK = 0,
    FF_NULL_POINTER = 1,
    FF_INVALID_UTF8 = 2,
    FF_PARSE_ERROR = 3,
    FF_INVALID_ARGUMENT = 4,
    FF_UNKNOWN_MODEL = 5,
    FF_DOMAIN_ERROR = 6,
    FF_CAP_EXCEEDED = 7,
    FF_BUFFER_TOO_SMALL = 8,
    FF_PANIC = 9,
}

/// A parsed model with its precomputed index space.
pub struct FfModel {
    enumerator: Enumerator,
}

/// A Fock state in canonical order.
pub struct FfState {
    state: FockState,
}

/// Per-step operation counts of the enumerator circuit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FfGateCounts {
    pub step1: u64,
    pub step2: u64,
    pub step3: u64,
    pub step4: u64,
    pub uncompute: u64,
    pub total: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> FfStatus {
    match e {
        Error::Parse(_) => FfStatus::FF_PARSE_ERROR,
        Error::UnknownBuiltin(_) => FfStatus::FF_UNKNOWN_MODEL,
        Error::Pole(_) | Error::Domain(_) => FfStatus::FF_DOMAIN_ERROR,
        Error::CapExceeded { .. } => FfStatus::FF_CAP_EXCEEDED,
        _ => FfStatus::FF_INVALID_ARGUMENT,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FfStatus>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfStatus::FF_OK,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            FfStatus::FF_PANIC
        }
    }
}

fn fail(e: Error) -> FfStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, FfStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(FfStatus::FF_NULL_POINTER);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        FfStatus::FF_INVALID_UTF8
    })
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, FfStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        FfStatus::FF_NULL_POINTER
    })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), FfStatus> {
    if out.is_null() {
        set_error("null output pointer");
        return Err(FfStatus::FF_NULL_POINTER);
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), FfStatus> {
    let bytes = text.as_bytes();
    if !needed.is_null() {
        needed.write(bytes.len() + 1);
    }
    if buf.is_null() || len < bytes.len() + 1 {
        set_error(format!("buffer needs {} bytes", bytes.len() + 1));
        return Err(FfStatus::FF_BUFFER_TOO_SMALL);
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, bytes.len());
    buf.add(bytes.len()).write(0);
    Ok(())
}

fn boxed_model(m: ModelSpec) -> *mut FfModel {
    Box::into_raw(Box::new(FfModel { enumerator: Enumerator::new(&m) }))
}

/// Copy the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ff_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> FfStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    guard(|| write_string(&msg, buf, len, needed))
}

/// Load a builtin model. `k <= 0` keeps the builtin's default cutoffs;
/// otherwise light-front models use resolution `k` and equal-time models
/// the matched lattice for `k`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_model_builtin(name: *const c_char, k: i64, out: *mut *mut FfModel) -> FfStatus {
    guard(|| {
        let name = read_str(name)?;
        let base = builtin_with(name, None, &Default::default()).map_err(fail)?;
        let m = if k > 0 {
            let c = match base.cutoffs.quantization {
                Quantization::LightFront => Cutoffs::light_front(k),
                Quantization::EqualTime => Cutoffs::equal_time_for(k),
            };
            builtin_with(name, Some(&c), &Default::default()).map_err(fail)?
        } else {
            base
        };
        write_out(out, boxed_model(m))
    })
}

/// Parse a model from its text form.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_model_parse(text: *const c_char, out: *mut *mut FfModel) -> FfStatus {
    guard(|| {
        let text = read_str(text)?;
        let m = parse_model(text).map_err(|e| fail(Error::Parse(e)))?;
        write_out(out, boxed_model(m))
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_model_free(model: *mut FfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Size of the sparsity-index space.
///
/// # Safety
/// Valid handle and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_model_index_space_size(model: *const FfModel, out: *mut usize) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        write_out(out, m.enumerator.index_space_size())
    })
}

/// Closed-form operation counts of the enumerator circuit.
///
/// # Safety
/// Valid handle and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_model_gate_counts(model: *const FfModel, out: *mut FfGateCounts) -> FfStatus {
    guard(|| {
        let m = &deref(model)?.enumerator.model;
        let t = gate_count(m, &m.cutoffs);
        write_out(
            out,
            FfGateCounts { step1: t.step1, step2: t.step2, step3: t.step3, step4: t.step4, uncompute: t.uncompute, total: t.total },
        )
    })
}

/// Parse a state literal such as `(b,1,3)(b,2,1)`.
///
/// # Safety
/// Valid handle, NUL-terminated literal and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_state_parse(model: *const FfModel, literal: *const c_char, out: *mut *mut FfState) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        let text = read_str(literal)?;
        let state = parse_state(&m.enumerator.model, text).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(FfState { state })))
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ff_state_free(state: *mut FfState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Write the state literal of `state` into `buf`.
///
/// # Safety
/// Valid handles; `buf` writable for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ff_state_format(
    model: *const FfModel,
    state: *const FfState,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        let s = deref(state)?;
        write_string(&format_state(&m.enumerator.model, &s.state), buf, len, needed)
    })
}

/// Hex form of the compact encoding of `state`.
///
/// # Safety
/// As for [`ff_state_format`].
#[no_mangle]
pub unsafe extern "C" fn ff_state_encode(
    model: *const FfModel,
    state: *const FfState,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FfStatus {
    guard(|| {
        let m = &deref(model)?.enumerator.model;
        let s = deref(state)?;
        let layout = BitLayout::new(&m.particle_types(), &m.cutoffs);
        let bits = layout.encode(&s.state).map_err(fail)?;
        write_string(&bits.to_hex(), buf, len, needed)
    })
}

/// Decode a hex bitstring produced by [`ff_state_encode`].
///
/// # Safety
/// Valid handle, NUL-terminated hex and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_state_decode(model: *const FfModel, hex: *const c_char, out: *mut *mut FfState) -> FfStatus {
    guard(|| {
        let m = &deref(model)?.enumerator.model;
        let text = read_str(hex)?;
        let layout = BitLayout::new(&m.particle_types(), &m.cutoffs);
        let bits = Bits::from_hex(text, layout.bits_total as usize).map_err(fail)?;
        let state = layout.decode(&bits).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(FfState { state })))
    })
}

/// Enumerator oracle: the state reached by 1-based index `i` and the flag
/// (0 when `i` denotes a nonzero transition, otherwise `i` with the input
/// state returned unchanged).
///
/// # Safety
/// Valid handles and output pointers.
#[no_mangle]
pub unsafe extern "C" fn ff_enumerate(
    model: *const FfModel,
    state: *const FfState,
    i: usize,
    out_state: *mut *mut FfState,
    out_flag: *mut usize,
) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        let s = deref(state)?;
        if out_state.is_null() || out_flag.is_null() {
            set_error("null output pointer");
            return Err(FfStatus::FF_NULL_POINTER);
        }
        let (next, flag, _) = m.enumerator.enumerate(&s.state, i);
        write_out(out_flag, flag)?;
        write_out(out_state, Box::into_raw(Box::new(FfState { state: next })))
    })
}

/// `⟨to|H|from⟩`.
///
/// # Safety
/// Valid handles and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_matrix_element(
    model: *const FfModel,
    from: *const FfState,
    to: *const FfState,
    out: *mut f64,
) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        let (f, g) = (deref(from)?, deref(to)?);
        write_out(out, m.enumerator.element(&f.state, &g.state).0)
    })
}

/// Number of distinct states connected to `state`.
///
/// # Safety
/// Valid handles and output pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_exact_sparsity(model: *const FfModel, state: *const FfState, out: *mut usize) -> FfStatus {
    guard(|| {
        let m = deref(model)?;
        let s = deref(state)?;
        write_out(out, m.enumerator.exact_sparsity(&s.state))
    })
}
