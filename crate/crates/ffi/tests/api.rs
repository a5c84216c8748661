use std::ffi::{CStr, CString};
use std::ptr;

use cablesync_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cs_last_error_message()) }.to_string_lossy().into_owned()
}

fn preset(name: &str) -> *mut CsScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cs_scenario_from_preset(name.as_ptr(), &mut s) }, CsStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn unknown_preset_sets_message() {
    let name = CString::new("knee").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cs_scenario_from_preset(name.as_ptr(), &mut s) }, CsStatus::InvalidConfig);
    assert!(s.is_null());
    assert!(last_error().contains("knee"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cs_scenario_from_preset(ptr::null(), &mut s) }, CsStatus::NullPointer);
    assert_eq!(unsafe { cs_run(ptr::null(), ptr::null_mut()) }, CsStatus::NullPointer);
    assert_eq!(unsafe { cs_run_tick_count(ptr::null()) }, 0);
    assert!(unsafe { cs_run_report(ptr::null()) }.is_null());
    unsafe {
        cs_scenario_free(ptr::null_mut());
        cs_run_free(ptr::null_mut());
        cs_string_free(ptr::null_mut());
    }
}

#[test]
fn config_text_errors_name_the_key() {
    let text = CString::new("sink.k2 = 1\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cs_scenario_from_config(text.as_ptr(), &mut s) }, CsStatus::InvalidConfig);
    assert!(last_error().contains("sink.k2"));
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { cs_scenario_from_config(bad.as_ptr().cast(), &mut s) }, CsStatus::InvalidUtf8);
}

#[test]
fn gain_check_matches_preset() {
    let s = preset("paper_v");
    let mut checks = [CsGainCheck::default(); CS_JOINTS];
    let mut all = true;
    assert_eq!(unsafe { cs_check_gains(s, checks.as_mut_ptr(), &mut all) }, CsStatus::Ok);
    assert!(!all);
    assert!(checks.iter().all(|c| !c.k4_pass && c.k4_margin < 0.0));
    unsafe { cs_scenario_free(s) };

    let s = preset("nominal");
    assert_eq!(unsafe { cs_check_gains(s, checks.as_mut_ptr(), ptr::null_mut()) }, CsStatus::Ok);
    assert!(checks.iter().all(|c| c.k3_pass && c.k4_pass));
    unsafe { cs_scenario_free(s) };
}

#[test]
fn short_run_through_the_handle_api() {
    let text = CString::new("preset = paper_v\nsim.duration = 2\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cs_scenario_from_config(text.as_ptr(), &mut s) }, CsStatus::Ok);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { cs_run(s, &mut r) }, CsStatus::Ok);
    unsafe { cs_scenario_free(s) };

    let n = unsafe { cs_run_tick_count(r) };
    assert_eq!(n, 2001);
    let mut summary = CsRunSummary::default();
    assert_eq!(unsafe { cs_run_summary(r, &mut summary) }, CsStatus::Ok);
    assert_eq!(summary.ticks, n);
    assert!(!summary.diverged && summary.certificates_pass);
    assert!((summary.t_end - 2.0).abs() < 1e-12);

    let mut tick = CsTick::default();
    assert_eq!(unsafe { cs_run_tick(r, n - 1, &mut tick) }, CsStatus::Ok);
    assert!((tick.t - 2.0).abs() < 1e-12);
    assert!(tick.lead.iter().all(|l| *l <= 1));
    assert_eq!(unsafe { cs_run_tick(r, n, &mut tick) }, CsStatus::OutOfRange);

    let report = unsafe { cs_run_report(r) };
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { cs_string_free(report) };
    assert!(text.starts_with("preset: paper_v\n"));
    assert!(text.contains("status: pass"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.csv");
    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cs_run_write_csv(r, c_path.as_ptr()) }, CsStatus::Ok);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), n + 1);

    let missing = CString::new(dir.path().join("no/such/dir/log.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cs_run_write_csv(r, missing.as_ptr()) }, CsStatus::Io);
    unsafe { cs_run_free(r) };
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(cs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
