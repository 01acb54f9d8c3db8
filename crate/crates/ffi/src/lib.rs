//! C ABI for driving a curriculum [`Session`] from another runtime.
//!
//! Arrays are passed as pointer plus length. Every fallible call returns 0 on
//! success or a nonzero status (see [`status_of`]) and writes a NUL-terminated
//! message into the caller's `err` buffer when one is supplied.

use std::ffi::{c_char, CStr};
use std::ptr;
use std::slice;

use selfpace::session::{Session, ENGINE_VERSION};
use selfpace::Error;

pub const STATUS_OK: i32 = 0;
pub const STATUS_CONFIG: i32 = 3;
pub const STATUS_DATA: i32 = 5;
pub const STATUS_INPUT: i32 = 8;
pub const STATUS_NULL: i32 = 9;

/// Order of the values written by [`selfpace_epoch_select`] into `stats_out`.
/// Entries absent on the first epoch are written as NaN.
pub const STATS_FIELDS: [&str; 10] = [
    "epoch",
    "selected_ratio",
    "mean_difficulty",
    "gamma_t",
    "sigma_t",
    "s_t",
    "delta_mu",
    "lambda_proposed",
    "capped",
    "floored",
];

pub fn status_of(e: &Error) -> i32 {
    match e.category() {
        "config" => STATUS_CONFIG,
        "data" => STATUS_DATA,
        _ => STATUS_INPUT,
    }
}

fn write_err(err: *mut c_char, err_len: usize, msg: &str) {
    if err.is_null() || err_len == 0 {
        return;
    }
    let bytes = msg.as_bytes();
    let n = bytes.len().min(err_len - 1);
    // SAFETY: caller guarantees `err` points to `err_len` writable bytes.
    unsafe {
        ptr::copy_nonoverlapping(bytes.as_ptr(), err as *mut u8, n);
        *err.add(n) = 0;
    }
}

fn fail(err: *mut c_char, err_len: usize, e: &Error) -> i32 {
    write_err(err, err_len, &e.to_string());
    status_of(e)
}

unsafe fn view<'a, T>(p: *const T, n: usize) -> Option<&'a [T]> {
    if n == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(p, n))
    }
}

/// Engine version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn selfpace_version() -> *const c_char {
    static V: std::sync::OnceLock<std::ffi::CString> = std::sync::OnceLock::new();
    V.get_or_init(|| std::ffi::CString::new(ENGINE_VERSION).unwrap_or_default())
        .as_ptr()
}

/// Creates a session from `n` selector overrides. Returns null on failure.
///
/// # Safety
/// `keys` must hold `n` valid NUL-terminated strings and `values` `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn selfpace_session_create(
    keys: *const *const c_char,
    values: *const f64,
    n: usize,
    err: *mut c_char,
    err_len: usize,
) -> *mut Session {
    let (Some(keys), Some(values)) = (view(keys, n), view(values, n)) else {
        write_err(err, err_len, "null key or value array");
        return ptr::null_mut();
    };
    let mut pairs = Vec::with_capacity(n);
    for (&k, &v) in keys.iter().zip(values) {
        if k.is_null() {
            write_err(err, err_len, "null key");
            return ptr::null_mut();
        }
        pairs.push((CStr::from_ptr(k).to_string_lossy().into_owned(), v));
    }
    match Session::from_pairs(pairs) {
        Ok(s) => Box::into_raw(Box::new(s)),
        Err(e) => {
            fail(err, err_len, &e);
            ptr::null_mut()
        }
    }
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `session` must come from [`selfpace_session_create`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn selfpace_session_free(session: *mut Session) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Marks a session closed; later calls on it fail.
///
/// # Safety
/// `session` must be a live pointer from [`selfpace_session_create`].
#[no_mangle]
pub unsafe extern "C" fn selfpace_session_close(session: *mut Session) -> i32 {
    match session.as_mut() {
        Some(s) => {
            s.close();
            STATUS_OK
        }
        None => STATUS_NULL,
    }
}

/// Writes `n` difficulties into `out` without changing the session.
///
/// # Safety
/// `p_vul`, `labels` and `out` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn selfpace_compute_difficulty(
    session: *const Session,
    p_vul: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
    err: *mut c_char,
    err_len: usize,
) -> i32 {
    let Some(s) = session.as_ref() else {
        write_err(err, err_len, "null session");
        return STATUS_NULL;
    };
    let (Some(p), Some(y)) = (view(p_vul, n), view(labels, n)) else {
        write_err(err, err_len, "null input array");
        return STATUS_NULL;
    };
    match s.compute_difficulty(p, y) {
        Ok(d) => {
            if !d.is_empty() {
                if out.is_null() {
                    write_err(err, err_len, "null output array");
                    return STATUS_NULL;
                }
                ptr::copy_nonoverlapping(d.as_ptr(), out, d.len());
            }
            STATUS_OK
        }
        Err(e) => fail(err, err_len, &e),
    }
}

/// Advances the session by one epoch. Writes the 0/1 mask into `mask_out`
/// (`n` bytes), the threshold into `lambda_out` and [`STATS_FIELDS`] into
/// `stats_out` (10 doubles, may be null).
///
/// # Safety
/// Array arguments must hold the stated number of elements.
#[no_mangle]
pub unsafe extern "C" fn selfpace_epoch_select(
    session: *mut Session,
    p_vul: *const f64,
    labels: *const u8,
    n: usize,
    mask_out: *mut u8,
    lambda_out: *mut f64,
    stats_out: *mut f64,
    err: *mut c_char,
    err_len: usize,
) -> i32 {
    let Some(s) = session.as_mut() else {
        write_err(err, err_len, "null session");
        return STATUS_NULL;
    };
    let (Some(p), Some(y)) = (view(p_vul, n), view(labels, n)) else {
        write_err(err, err_len, "null input array");
        return STATUS_NULL;
    };
    if n > 0 && (mask_out.is_null() || lambda_out.is_null()) {
        write_err(err, err_len, "null output pointer");
        return STATUS_NULL;
    }
    match s.epoch_select(p, y) {
        Ok(sel) => {
            for (i, &f) in sel.mask.flags.iter().enumerate() {
                *mask_out.add(i) = u8::from(f);
            }
            *lambda_out = sel.lambda;
            if !stats_out.is_null() {
                for (i, name) in STATS_FIELDS.iter().enumerate() {
                    *stats_out.add(i) = sel.stats.get(*name).copied().unwrap_or(f64::NAN);
                }
            }
            STATUS_OK
        }
        Err(e) => fail(err, err_len, &e),
    }
}
