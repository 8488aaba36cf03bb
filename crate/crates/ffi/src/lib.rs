//! C ABI over `qpolar`.
//!
//! Codes are opaque handles created by `qp_code_*` constructors and released
//! with [`qp_code_free`]. Every fallible call returns a [`QpStatus`]; the
//! message of the most recent failure on the calling thread is available
//! from [`qp_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qpolar::code::{initial_info_set, CodeFile};
use qpolar::decoder::{measure_syndrome, QuantumDecoder, SyndromePair};
use qpolar::gates::gate_report;
use qpolar::montecarlo::run_point;
use qpolar::{BitVec, ChannelParam, Error, PauliVec, QuantumCode};

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    InvalidArgument = 1,
    Validation = 2,
    DegenerateMessage = 3,
    DecodeFailure = 4,
    Parse = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Opaque code handle.
pub struct QpCode {
    code: QuantumCode,
}

/// Gate accounting for a code.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QpGateReport {
    pub n: usize,
    pub precoder_nnz: usize,
    pub encoder_extra_gates: usize,
    pub stab_nnz: usize,
    pub total_gates: usize,
    pub delta_vs_unprecoded: i64,
    pub surface_code_reference: usize,
}

/// Result of one Monte Carlo point.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QpSimResult {
    pub trials: u64,
    pub failures: u64,
    pub ler: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QpStatus {
    match e {
        Error::InvalidArgument(_) => QpStatus::InvalidArgument,
        Error::Validation(_) => QpStatus::Validation,
        Error::DegenerateMessage => QpStatus::DegenerateMessage,
        Error::DecodeFailure => QpStatus::DecodeFailure,
        Error::Parse { .. } => QpStatus::Parse,
        Error::Io(_) => QpStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QpStatus::Ok
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QpStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn code_arg<'a>(p: *const QpCode) -> Result<&'a QuantumCode, Fail> {
    p.as_ref().map(|c| &c.code).ok_or(Fail::Null("code"))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut_arg<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn boxed(code: QuantumCode) -> *mut QpCode {
    Box::into_raw(Box::new(QpCode { code }))
}

/// Library version, a static nul-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reliability-ordered code of length `2^n_exp` with identity precoder.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qp_code_construct(n_exp: u32, p: f64, out: *mut *mut QpCode) -> QpStatus {
    guard(|| {
        let code = QuantumCode::unprecoded(initial_info_set(n_exp, p)?)?;
        put(out, boxed(code), "out")
    })
}

/// Parses a code document. Structurally invalid codes are rejected with
/// `Validation`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qp_code_from_json(json: *const c_char, out: *mut *mut QpCode) -> QpStatus {
    guard(|| {
        let code = CodeFile::parse(str_arg(json, "json")?)?.to_code()?;
        put(out, boxed(code), "out")
    })
}

/// Loads a code file from disk.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qp_code_load(path: *const c_char, out: *mut *mut QpCode) -> QpStatus {
    guard(|| {
        let code = CodeFile::load(str_arg(path, "path")?)?.to_code()?;
        put(out, boxed(code), "out")
    })
}

/// Writes the code file to disk.
///
/// # Safety
/// `code` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qp_code_save(code: *const QpCode, path: *const c_char) -> QpStatus {
    guard(|| {
        let c = code_arg(code)?;
        CodeFile::from_code(c, Default::default()).save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `code` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_code_free(code: *mut QpCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Code length `N`, or 0 for a null handle.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qp_code_n(code: *const QpCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.n())
}

/// Number of frozen indices, which is the length of each syndrome half.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qp_code_frozen_count(code: *const QpCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.n() - c.code.spec().k())
}

/// Number of logical indices.
///
/// # Safety
/// `code` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qp_code_logical_count(code: *const QpCode) -> usize {
    code.as_ref().map_or(0, |c| c.code.logical_set().len())
}

/// Measures the syndrome of `noise` (N Pauli symbols, `x | z << 1`) into
/// `sx` and `sz`, each of length `qp_code_frozen_count`.
///
/// # Safety
/// `noise` must hold `n` bytes and `sx`, `sz` `n_frozen` bytes each.
#[no_mangle]
pub unsafe extern "C" fn qp_measure_syndrome(
    code: *const QpCode,
    noise: *const u8,
    n: usize,
    sx: *mut u8,
    sz: *mut u8,
    n_frozen: usize,
) -> QpStatus {
    guard(|| {
        let c = code_arg(code)?;
        let symbols = slice_arg(noise, n, "noise")?;
        if n != c.n() || symbols.iter().any(|&s| s > 3) {
            return Err(Error::InvalidArgument("noise must hold N symbols in 0..4".into()).into());
        }
        if n_frozen != c.n() - c.spec().k() {
            return Err(Error::InvalidArgument("syndrome buffers must hold |F| entries".into()).into());
        }
        let s = measure_syndrome(&PauliVec::from_symbols(symbols), c)?;
        let (ox, oz) = (slice_mut_arg(sx, n_frozen, "sx")?, slice_mut_arg(sz, n_frozen, "sz")?);
        for k in 0..n_frozen {
            ox[k] = u8::from(s.sx.get(k));
            oz[k] = u8::from(s.sz.get(k));
        }
        Ok(())
    })
}

/// List-decodes a syndrome. Writes the estimated physical noise (N Pauli
/// symbols) to `noise_out` and its path metric to `pm_out` (may be null).
///
/// # Safety
/// `sx`, `sz` must hold `n_frozen` bytes; `noise_out` must hold `n` bytes.
#[no_mangle]
pub unsafe extern "C" fn qp_decode(
    code: *const QpCode,
    p: f64,
    list_size: usize,
    sx: *const u8,
    sz: *const u8,
    n_frozen: usize,
    noise_out: *mut u8,
    n: usize,
    pm_out: *mut f64,
) -> QpStatus {
    guard(|| {
        let c = code_arg(code)?;
        let bits = |v: &[u8]| BitVec::from_bools(&v.iter().map(|&b| b != 0).collect::<Vec<_>>());
        let syndrome = SyndromePair {
            sx: bits(slice_arg(sx, n_frozen, "sx")?),
            sz: bits(slice_arg(sz, n_frozen, "sz")?),
        };
        if n != c.n() {
            return Err(Error::InvalidArgument("noise buffer must hold N entries".into()).into());
        }
        let d = QuantumDecoder::new(c, ChannelParam::new(p)?, list_size)?.decode(&syndrome)?;
        slice_mut_arg(noise_out, n, "noise_out")?.copy_from_slice(&d.noise.symbols());
        if !pm_out.is_null() {
            pm_out.write(d.pm);
        }
        Ok(())
    })
}

/// Runs `trials` Monte Carlo trials at depolarizing probability `p`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qp_simulate(
    code: *const QpCode,
    p: f64,
    list_size: usize,
    trials: u64,
    seed: u64,
    out: *mut QpSimResult,
) -> QpStatus {
    guard(|| {
        let c = code_arg(code)?;
        let r = run_point(c, ChannelParam::new(p)?, list_size, trials, seed)?;
        put(
            out,
            QpSimResult {
                trials: r.trials,
                failures: r.failures,
                ler: r.ler,
                ci95_low: r.ci95_low,
                ci95_high: r.ci95_high,
            },
            "out",
        )
    })
}

/// Clifford gate accounting.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qp_gatecount(code: *const QpCode, out: *mut QpGateReport) -> QpStatus {
    guard(|| {
        let r = gate_report(code_arg(code)?)?;
        put(
            out,
            QpGateReport {
                n: r.n,
                precoder_nnz: r.precoder_nnz,
                encoder_extra_gates: r.encoder_extra_gates,
                stab_nnz: r.stab_nnz,
                total_gates: r.total_gates,
                delta_vs_unprecoded: r.delta_vs_unprecoded,
                surface_code_reference: r.surface_code_reference,
            },
            "out",
        )
    })
}
