use std::ffi::{c_char, CStr, CString};
use std::ptr;

use selfpace::session::Session;
use selfpace::SelectorConfig;
use selfpace_ffi::*;

fn create(pairs: &[(&str, f64)]) -> (*mut Session, String) {
    let keys: Vec<CString> = pairs
        .iter()
        .map(|(k, _)| CString::new(*k).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = keys.iter().map(|k| k.as_ptr()).collect();
    let vals: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut err = [0 as c_char; 256];
    let s = unsafe {
        selfpace_session_create(
            ptrs.as_ptr(),
            vals.as_ptr(),
            pairs.len(),
            err.as_mut_ptr(),
            err.len(),
        )
    };
    let msg = unsafe { CStr::from_ptr(err.as_ptr()) }
        .to_string_lossy()
        .into_owned();
    (s, msg)
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(selfpace_version()) };
    assert!(!v.to_bytes().is_empty());
}

#[test]
fn invalid_config_reports_field() {
    let (s, msg) = create(&[("k", -1.0)]);
    assert!(s.is_null());
    assert!(msg.contains("k must be ≥ 0"), "{msg}");
}

#[test]
fn parity_with_core() {
    let p: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 63.0).collect();
    let y: Vec<u8> = (0..64).map(|i| (i % 3 == 0) as u8).collect();
    let (s, _) = create(&[("r_init", 0.2)]);
    assert!(!s.is_null());
    let mut core = Session::new(SelectorConfig {
        r_init: 0.2,
        ..SelectorConfig::default()
    })
    .unwrap();

    let mut d = vec![0.0; p.len()];
    let rc = unsafe {
        selfpace_compute_difficulty(
            s,
            p.as_ptr(),
            y.as_ptr(),
            p.len(),
            d.as_mut_ptr(),
            ptr::null_mut(),
            0,
        )
    };
    assert_eq!(rc, STATUS_OK);
    assert_eq!(d, core.compute_difficulty(&p, &y).unwrap());

    for epoch in 0..3 {
        let q: Vec<f64> = p
            .iter()
            .map(|v| (v * 0.9 + 0.05 * epoch as f64).min(1.0))
            .collect();
        let mut mask = vec![0u8; q.len()];
        let mut lambda = 0.0;
        let mut stats = [0.0; 10];
        let rc = unsafe {
            selfpace_epoch_select(
                s,
                q.as_ptr(),
                y.as_ptr(),
                q.len(),
                mask.as_mut_ptr(),
                &mut lambda,
                stats.as_mut_ptr(),
                ptr::null_mut(),
                0,
            )
        };
        assert_eq!(rc, STATUS_OK);
        let want = core.epoch_select(&q, &y).unwrap();
        assert_eq!(lambda, want.lambda);
        let flags: Vec<bool> = mask.iter().map(|&m| m == 1).collect();
        assert_eq!(flags, want.mask.flags);
        assert_eq!(stats[0], epoch as f64);
        assert_eq!(stats[3].is_nan(), epoch == 0);
    }
    unsafe { selfpace_session_free(s) };
}

#[test]
fn closed_and_bad_input() {
    let (s, _) = create(&[]);
    let mut err = [0 as c_char; 128];
    let mut out = [0.0; 2];
    let rc = unsafe {
        selfpace_compute_difficulty(
            s,
            [0.5, 1.5].as_ptr(),
            [1u8, 0].as_ptr(),
            2,
            out.as_mut_ptr(),
            err.as_mut_ptr(),
            err.len(),
        )
    };
    assert_ne!(rc, STATUS_OK);
    assert_eq!(unsafe { selfpace_session_close(s) }, STATUS_OK);
    let rc = unsafe {
        selfpace_compute_difficulty(
            s,
            [0.5].as_ptr(),
            [1u8].as_ptr(),
            1,
            out.as_mut_ptr(),
            err.as_mut_ptr(),
            err.len(),
        )
    };
    assert_eq!(rc, STATUS_INPUT);
    let msg = unsafe { CStr::from_ptr(err.as_ptr()) }
        .to_string_lossy()
        .into_owned();
    assert_eq!(msg, "session is closed");
    unsafe { selfpace_session_free(s) };
    assert_eq!(
        unsafe { selfpace_session_close(ptr::null_mut()) },
        STATUS_NULL
    );
}
