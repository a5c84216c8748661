//! Compiles and links a C client against the generated header and the static
//! library.

use std::path::{Path, PathBuf};
use std::process::Command;

const CLIENT: &str = r#"
#include <stdio.h>
#include "cablesync.h"

int main(void) {
    CsScenario *s = NULL;
    if (cs_scenario_from_config("preset = paper_v\nsim.duration = 0.5\n", &s) != CS_STATUS_OK) {
        fprintf(stderr, "%s\n", cs_last_error_message());
        return 1;
    }
    CsGainCheck checks[CS_JOINTS];
    bool all = true;
    if (cs_check_gains(s, checks, &all) != CS_STATUS_OK || all) return 2;
    CsRun *r = NULL;
    if (cs_run(s, &r) != CS_STATUS_OK) return 3;
    cs_scenario_free(s);
    CsRunSummary sum;
    if (cs_run_summary(r, &sum) != CS_STATUS_OK || sum.ticks != cs_run_tick_count(r)) return 4;
    CsTick tick;
    if (cs_run_tick(r, sum.ticks - 1, &tick) != CS_STATUS_OK) return 5;
    if (cs_run_tick(r, sum.ticks, &tick) != CS_STATUS_OUT_OF_RANGE) return 6;
    char *report = cs_run_report(r);
    if (report == NULL) return 7;
    cs_string_free(report);
    cs_run_free(r);
    printf("%zu %.3f\n", sum.ticks, tick.t);
    return 0;
}
"#;

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// `target/<profile>`, two levels above the test executable in `deps/`.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/cablesync.h")).unwrap();
    for name in [
        "cs_scenario_from_preset",
        "cs_scenario_from_config",
        "cs_scenario_free",
        "cs_check_gains",
        "cs_run",
        "cs_run_free",
        "cs_run_summary",
        "cs_run_tick_count",
        "cs_run_tick",
        "cs_run_report",
        "cs_run_write_csv",
        "cs_string_free",
        "cs_last_error_message",
        "CS_STATUS_OK",
        "#define CS_JOINTS 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_client_builds_and_runs() {
    let lib = profile_dir().join("libcablesync_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, CLIENT).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "501 0.500");
}
