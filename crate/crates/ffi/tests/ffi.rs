use std::ffi::{CStr, CString};
use std::ptr;

use klac_ffi::*;

fn last_error() -> String {
    let p = klac_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { klac_string_free(p) };
    s
}

#[test]
fn lower_bound_and_errors() {
    let mut out = 0u64;
    assert_eq!(unsafe { klac_lower_bound(6, 63, 3, &mut out) }, KlacStatus::Ok);
    assert_eq!(out, 7);
    assert!(klac_last_error().is_null());

    assert_eq!(
        unsafe { klac_lower_bound(6, 63, 0, &mut out) },
        KlacStatus::InvalidInput
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { klac_lower_bound(6, 63, 3, ptr::null_mut()) },
        KlacStatus::NullPointer
    );
    assert!(last_error().contains("null"));
}

#[test]
fn universal_scheme_handle() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { klac_scheme_build(8, 255, 3, &mut s) }, KlacStatus::Ok);
    assert_eq!(unsafe { klac_scheme_rows(s) }, 17);

    let d = CString::new("01001110").unwrap();
    let mut rows = [0usize; 3];
    let mut len = 0;
    assert_eq!(
        unsafe { klac_scheme_reconstruct(s, d.as_ptr(), rows.as_mut_ptr(), 3, &mut len) },
        KlacStatus::Ok
    );
    assert_eq!(&rows[..len], &[2, 10, 16]);

    let mut small = [0usize; 1];
    assert_eq!(
        unsafe { klac_scheme_reconstruct(s, d.as_ptr(), small.as_mut_ptr(), 1, &mut len) },
        KlacStatus::BufferTooSmall
    );
    assert_eq!(len, 3);

    let bad = CString::new("0100").unwrap();
    assert_eq!(
        unsafe { klac_scheme_reconstruct(s, bad.as_ptr(), rows.as_mut_ptr(), 3, &mut len) },
        KlacStatus::DimensionMismatch
    );

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { klac_scheme_row(s, 0, &mut text) }, KlacStatus::Ok);
    assert_eq!(take_string(text).len(), 8);
    assert_eq!(unsafe { klac_scheme_row(s, 17, &mut text) }, KlacStatus::InvalidInput);

    unsafe { klac_scheme_free(s) };
    unsafe { klac_scheme_free(ptr::null_mut()) };
    assert_eq!(unsafe { klac_scheme_rows(ptr::null()) }, 0);
}

#[test]
fn graph_scheme_handle() {
    let d = "100000\n010000\n001000\n000100\n000010\n000001\n111100\n111010\n110011\n";
    let text = CString::new(d).unwrap();
    for (method, at_most) in [(KlacGraphMethod::Scr, 12), (KlacGraphMethod::BranchSearch, 6)] {
        let mut s = ptr::null_mut();
        assert_eq!(
            unsafe { klac_graph_scheme_build(text.as_ptr(), 2, method, 0, &mut s) },
            KlacStatus::Ok
        );
        let size = unsafe { klac_graph_scheme_rows(s) };
        assert!(size <= at_most);

        let mut out = ptr::null_mut();
        assert_eq!(unsafe { klac_graph_scheme_matrix(s, &mut out) }, KlacStatus::Ok);
        let p = klac::BitMatrix::parse_text(&take_string(out)).unwrap();
        assert_eq!(p.num_rows(), size);

        let clients = klac::BitMatrix::parse_text(d).unwrap();
        for c in 0..clients.num_rows() {
            let mut rows = [0usize; 2];
            let mut len = 0;
            let status = unsafe { klac_graph_scheme_client_rows(s, c, rows.as_mut_ptr(), 2, &mut len) };
            assert_eq!(status, KlacStatus::Ok);
            assert_eq!(&p.sum_rows(rows[..len].iter().map(|r| r - 1)), clients.row(c));
        }
        let mut len = 0;
        assert_eq!(
            unsafe { klac_graph_scheme_client_rows(s, 9, ptr::null_mut(), 0, &mut len) },
            KlacStatus::InvalidInput
        );
        unsafe { klac_graph_scheme_free(s) };
    }

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { klac_graph_scheme_build(text.as_ptr(), 3, KlacGraphMethod::Scr, 0, &mut s) },
        KlacStatus::InvalidInput
    );
    let junk = CString::new("10x\n").unwrap();
    assert_eq!(
        unsafe { klac_graph_scheme_build(junk.as_ptr(), 2, KlacGraphMethod::Scr, 0, &mut s) },
        KlacStatus::Parse
    );
    assert!(s.is_null());
}

#[test]
fn privacy_report_matches_library() {
    let mut r = KlacPrivacyReport::default();
    assert_eq!(unsafe { klac_privacy_report(100, 20, 2, 5, &mut r) }, KlacStatus::Ok);
    let lib = klac::privacy::privacy_report(100, 20, 2, 5).unwrap();
    assert_eq!(r.entropy_exact, lib.entropy_exact);
    assert_eq!(r.mil_upper_exact, lib.mil_upper_exact);
    assert_eq!(r.mil_conventional_lower, lib.mil_conventional_lower);
    assert_eq!(
        unsafe { klac_privacy_report(10, 20, 2, 5, &mut r) },
        KlacStatus::InvalidInput
    );
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(klac_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/klac.h")).unwrap();
    for name in [
        "klac_last_error",
        "klac_lower_bound",
        "klac_scheme_build",
        "klac_scheme_reconstruct",
        "klac_graph_scheme_build",
        "klac_privacy_report",
        "klac_string_free",
        "KLAC_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_header() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libklac_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = env!("CARGO_MANIFEST_DIR");
    let out = std::env::temp_dir().join(format!("klac_smoke_{}", std::process::id()));
    let status = std::process::Command::new("cc")
        .args([&format!("{dir}/tests/c/smoke.c"), "-I", &format!("{dir}/include"), "-o"])
        .arg(&out)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let run = std::process::Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("3 rows\n"));
}
