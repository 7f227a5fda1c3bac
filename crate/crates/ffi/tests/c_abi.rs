use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use bounce_ffi::*;

const SQUARE: &str = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "labels": ["A","B","C","D"]}"#;

fn square() -> *mut BounceTable {
    let json = CString::new(SQUARE).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { bounce_table_from_json(json.as_ptr(), &mut t) }, BounceStatus::Ok);
    assert!(!t.is_null());
    t
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    bounce_string_free(s);
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bounce_last_error()) }.to_str().unwrap().to_string()
}

#[test]
fn table_round_trip_and_queries() {
    let t = square();
    unsafe {
        assert_eq!(bounce_table_len(t), 4);
        let mut ok = false;
        let w = CString::new("B,D").unwrap();
        assert_eq!(bounce_is_realizable(t, w.as_ptr(), &mut ok), BounceStatus::Ok);
        assert!(ok);
        let w = CString::new("A,B,A").unwrap();
        assert_eq!(bounce_is_realizable(t, w.as_ptr(), &mut ok), BounceStatus::Ok);
        assert!(!ok);

        let mut s = ptr::null_mut();
        assert_eq!(bounce_language(t, 2, &mut s), BounceStatus::Ok);
        assert_eq!(take(s).lines().filter(|l| l.contains(',')).count(), 12);

        assert_eq!(bounce_trace(t, 0.5, 0.2, 0.7, 5, &mut s), BounceStatus::Ok);
        assert_eq!(take(s), "B,C,D,A,B");

        assert_eq!(bounce_adjacency(t, 3, &mut s), BounceStatus::Ok);
        assert_eq!(take(s), "A B\nA D\nB C\nC D\n");

        let mut ang = BounceAngle::default();
        let (a, b) = (CString::new("A").unwrap(), CString::new("B").unwrap());
        assert_eq!(bounce_estimate_angle(t, a.as_ptr(), b.as_ptr(), 5, &mut ang), BounceStatus::Ok);
        assert_eq!((ang.exact, ang.p, ang.q), (1, 1, 2));

        let mut eps = 0.0;
        let words = CString::new("B,D\nA,B\n").unwrap();
        assert_eq!(bounce_persistence_radius(t, words.as_ptr(), &mut eps), BounceStatus::Ok);
        assert!(eps > 0.0);
        bounce_table_free(t);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let t = square();
    unsafe {
        let mut ok = false;
        let w = CString::new("A,Z").unwrap();
        assert_eq!(bounce_is_realizable(t, w.as_ptr(), &mut ok), BounceStatus::UnknownLabel);
        assert!(last_error().contains('Z'));
        let w = CString::new("A,A").unwrap();
        assert_eq!(bounce_is_realizable(t, w.as_ptr(), &mut ok), BounceStatus::InvalidWord);
        assert_eq!(bounce_is_realizable(ptr::null(), w.as_ptr(), &mut ok), BounceStatus::NullPointer);
        let mut eps = 0.0;
        let words = CString::new("A,B,A").unwrap();
        assert_eq!(bounce_persistence_radius(t, words.as_ptr(), &mut eps), BounceStatus::Infeasible);
        let mut s = ptr::null_mut();
        assert_eq!(bounce_square_word(2, 4, &mut s), BounceStatus::Precondition);
        assert_eq!(bounce_square_word(3, 2, &mut s), BounceStatus::Ok);
        assert_eq!(take(s), "0010100101");
        assert_eq!(last_error(), "");

        let bad = CString::new(r#"{"vertices": [[0,0],[1,1],[1,0],[0,1]]}"#).unwrap();
        let mut u = ptr::null_mut();
        assert_eq!(bounce_table_from_json(bad.as_ptr(), &mut u), BounceStatus::InvalidPolygon);
        assert!(u.is_null());
        bounce_table_free(t);
        bounce_table_free(ptr::null_mut());
        bounce_string_free(ptr::null_mut());
    }
}

#[test]
fn table_from_arrays() {
    let xy = [0.0, 0.0, 1.0, 0.0, 0.5, 0.8];
    let names: Vec<CString> = ["A", "B", "C"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = names.iter().map(|s| s.as_ptr()).collect();
    let mut t = ptr::null_mut();
    unsafe {
        assert_eq!(bounce_table_new(xy.as_ptr(), ptrs.as_ptr(), 3, &mut t), BounceStatus::Ok);
        assert_eq!(bounce_table_len(t), 3);
        bounce_table_free(t);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("bounce.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for f in [
        "bounce_last_error",
        "bounce_string_free",
        "bounce_table_from_json",
        "bounce_table_new",
        "bounce_table_free",
        "bounce_table_len",
        "bounce_is_realizable",
        "bounce_trace",
        "bounce_language",
        "bounce_square_word",
        "bounce_estimate_angle",
        "bounce_adjacency",
        "bounce_persistence_radius",
        "BOUNCE_STATUS_INFEASIBLE = 6",
        "typedef struct BounceTable BounceTable;",
    ] {
        assert!(h.contains(f), "header lacks {f}");
    }
}

/// Compiles and runs a small C client against the static library.
#[test]
fn c_client_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libbounce_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "bounce.h"
int main(void) {
    BounceTable *t = NULL;
    const char *json = "{\"vertices\": [[0,0],[1,0],[1,1],[0,1]], \"labels\": [\"A\",\"B\",\"C\",\"D\"]}";
    if (bounce_table_from_json(json, &t) != BOUNCE_STATUS_OK) return 1;
    bool ok = false;
    if (bounce_is_realizable(t, "B,D,B", &ok) != BOUNCE_STATUS_OK || !ok) return 2;
    char *w = NULL;
    if (bounce_square_word(5, 12, &w) != BOUNCE_STATUS_OK) return 3;
    printf("%s\n", w);
    bounce_string_free(w);
    if (bounce_is_realizable(t, "A,Q", &ok) != BOUNCE_STATUS_UNKNOWN_LABEL) return 4;
    if (strlen(bounce_last_error()) == 0) return 5;
    bounce_table_free(t);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("client");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "client exit {:?}", out.status.code());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        "0110111011011011101101110110110111"
    );
}
