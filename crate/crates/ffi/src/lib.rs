//! C ABI over `rsa_cegd`.
//!
//! Every fallible function returns a [`CegdStatus`] code; on failure a
//! description is available from [`cegd_last_error_message`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned through out-parameters are owned by the caller
//! and released with [`cegd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigUint;
use rsa_cegd::crypto::{rsa_keygen_with_exponent, RsaKeyPair};
use rsa_cegd::harness::{audit_report, run, AttackReport, Scenario, WorldConfig};

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CegdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    RunFailed = 4,
    ParseFailed = 5,
    VerifyFailed = 6,
    KeygenFailed = 7,
    Panic = 8,
}

/// Result of one scenario run, or a transcript loaded from JSON lines.
pub struct CegdReport {
    inner: AttackReport,
}

pub struct CegdKeyPair {
    inner: RsaKeyPair,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(status: CegdStatus, msg: impl Into<String>) -> CegdStatus {
    set_error(msg);
    status
}

/// Runs `body`, converting a panic into [`CegdStatus::Panic`].
fn guarded(body: impl FnOnce() -> CegdStatus) -> CegdStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CegdStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, CegdStatus> {
    if s.is_null() {
        return Err(fail(CegdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CegdStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_string(out: *mut *mut c_char, value: String) -> CegdStatus {
    match CString::new(value) {
        Ok(c) => {
            *out = c.into_raw();
            CegdStatus::Ok
        }
        Err(_) => fail(CegdStatus::InvalidArgument, "string contains a nul byte"),
    }
}

fn check_key_args(bits: u64, exponent: u64) -> Result<(), CegdStatus> {
    if bits < 16 {
        return Err(fail(
            CegdStatus::InvalidArgument,
            "bits must be at least 16",
        ));
    }
    if exponent < 3 || exponent.is_multiple_of(2) {
        return Err(fail(
            CegdStatus::InvalidArgument,
            "exponent must be odd and at least 3",
        ));
    }
    Ok(())
}

/// Library version string.
#[no_mangle]
pub extern "C" fn cegd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Last error on this thread, or null. Valid until the next call into this library.
#[no_mangle]
pub extern "C" fn cegd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cegd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs `mode` (`"honest"`, `"replay"` or `"eoo-forward"`).
///
/// # Safety
/// `mode` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_run(
    mode: *const c_char,
    bits: u64,
    exponent: u64,
    seed: u64,
    out: *mut *mut CegdReport,
) -> CegdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CegdStatus::NullPointer, "out is null");
        }
        let mode = match read_str(mode, "mode") {
            Ok(m) => m,
            Err(s) => return s,
        };
        let scenario: Scenario = match mode.parse() {
            Ok(s) => s,
            Err(e) => return fail(CegdStatus::InvalidArgument, e),
        };
        if let Err(s) = check_key_args(bits, exponent) {
            return s;
        }
        match run(
            scenario,
            &WorldConfig::new(bits, BigUint::from(exponent), seed),
        ) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(CegdReport { inner: report }));
                CegdStatus::Ok
            }
            Err(e) => fail(CegdStatus::RunFailed, e.to_string()),
        }
    })
}

/// Parses a JSON-lines transcript into a report handle without verifying it.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_from_jsonl(
    text: *const c_char,
    out: *mut *mut CegdReport,
) -> CegdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CegdStatus::NullPointer, "out is null");
        }
        let text = match read_str(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match AttackReport::from_jsonl(text) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(CegdReport { inner: report }));
                CegdStatus::Ok
            }
            Err(e) => fail(CegdStatus::ParseFailed, e.to_string()),
        }
    })
}

/// Serializes the report as a JSON-lines transcript.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_to_jsonl(
    report: *const CegdReport,
    out: *mut *mut c_char,
) -> CegdStatus {
    guarded(|| match (report.as_ref(), out.is_null()) {
        (Some(r), false) => write_string(out, r.inner.to_jsonl()),
        _ => fail(CegdStatus::NullPointer, "report or out is null"),
    })
}

/// Verdict label: `FAIR`, `UNFAIR_FOR_B` or `UNFAIR_FOR_A`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_verdict(
    report: *const CegdReport,
    out: *mut *mut c_char,
) -> CegdStatus {
    guarded(|| match (report.as_ref(), out.is_null()) {
        (Some(r), false) => write_string(out, r.inner.verdict.label().to_owned()),
        _ => fail(CegdStatus::NullPointer, "report or out is null"),
    })
}

/// Number of messages in the report's transcript.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_message_count(
    report: *const CegdReport,
    out: *mut usize,
) -> CegdStatus {
    guarded(|| match (report.as_ref(), out.is_null()) {
        (Some(r), false) => {
            *out = r.inner.transcript.len();
            CegdStatus::Ok
        }
        _ => fail(CegdStatus::NullPointer, "report or out is null"),
    })
}

/// Re-verifies every message and evidence entry and recomputes the verdict.
/// Returns [`CegdStatus::VerifyFailed`] with the findings as the error message.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_verify(report: *const CegdReport) -> CegdStatus {
    guarded(|| {
        let Some(r) = report.as_ref() else {
            return fail(CegdStatus::NullPointer, "report is null");
        };
        let audit = audit_report(&r.inner);
        if audit.is_clean() {
            CegdStatus::Ok
        } else {
            let lines: Vec<String> = audit.findings.iter().map(ToString::to_string).collect();
            fail(CegdStatus::VerifyFailed, lines.join("\n"))
        }
    })
}

/// Parses and verifies a JSON-lines transcript in one call.
///
/// # Safety
/// `text` must be a valid C string.
#[no_mangle]
pub unsafe extern "C" fn cegd_verify_transcript(text: *const c_char) -> CegdStatus {
    let mut handle: *mut CegdReport = ptr::null_mut();
    let status = cegd_report_from_jsonl(text, &mut handle);
    if status != CegdStatus::Ok {
        return status;
    }
    let status = cegd_report_verify(handle);
    cegd_report_free(handle);
    status
}

/// # Safety
/// `report` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cegd_report_free(report: *mut CegdReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Deterministic RSA key pair with a modulus of exactly `bits` bits.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_keygen(
    bits: u64,
    exponent: u64,
    seed: u64,
    out: *mut *mut CegdKeyPair,
) -> CegdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CegdStatus::NullPointer, "out is null");
        }
        if let Err(s) = check_key_args(bits, exponent) {
            return s;
        }
        match rsa_keygen_with_exponent(bits, &BigUint::from(exponent), seed) {
            Ok(keys) => {
                *out = Box::into_raw(Box::new(CegdKeyPair { inner: keys }));
                CegdStatus::Ok
            }
            Err(e) => fail(CegdStatus::KeygenFailed, e.to_string()),
        }
    })
}

/// Key pair as a JSON object of lowercase hex fields `n`, `e`, `d`, `p`, `q`.
///
/// # Safety
/// `keypair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cegd_keypair_to_json(
    keypair: *const CegdKeyPair,
    out: *mut *mut c_char,
) -> CegdStatus {
    guarded(|| match (keypair.as_ref(), out.is_null()) {
        (Some(k), false) => write_string(
            out,
            serde_json::to_string(&k.inner).expect("key pair serializes"),
        ),
        _ => fail(CegdStatus::NullPointer, "keypair or out is null"),
    })
}

/// Modulus size in bits.
///
/// # Safety
/// `keypair` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cegd_keypair_modulus_bits(keypair: *const CegdKeyPair) -> u64 {
    keypair.as_ref().map_or(0, |k| k.inner.n.bits())
}

/// # Safety
/// `keypair` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cegd_keypair_free(keypair: *mut CegdKeyPair) {
    if !keypair.is_null() {
        drop(Box::from_raw(keypair));
    }
}
