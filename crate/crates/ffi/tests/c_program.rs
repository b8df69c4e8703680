use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "multistable.h"

int main(void) {
    MsSpec *spec = NULL;
    if (ms_spec_from_json("{\"breakpoints\": [0, 1], \"coefficients\": [1], \"alpha_values\": [1]}", &spec) != MS_OK) {
        return 1;
    }
    MsEstimate e;
    if (ms_tail(spec, 10.0, 1e-12, 1e-12, &e) != MS_OK) {
        return 2;
    }
    double exact = 2.0 / M_PI * atan(0.1);
    if (fabs(e.value - exact) > 1e-10) {
        return 3;
    }
    double c;
    if (ms_tail_constant(2.5, &c) != MS_DOMAIN || ms_last_error_message()[0] == '\0') {
        return 4;
    }
    ms_spec_free(spec);
    printf("ok\n");
    return 0;
}
"#;

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|deps| deps.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = profile_dir().join("libmultistable_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = Command::new("cc")
        .args(["-std=c11", "-D_DEFAULT_SOURCE", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
