//! C ABI for the cablesync simulator.
//!
//! Scenarios and runs are opaque handles created and destroyed by this
//! library. Every fallible function returns a [`CsStatus`]; on failure the
//! message is available from [`cs_last_error_message`] on the same thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cablesync::config::parse_config;
use cablesync::dynamics::JOINTS;
use cablesync::motor::{Role, MOTORS};
use cablesync::sim::log::write_log;
use cablesync::sim::monitors::design_gain_checks;
use cablesync::sim::{run, CertificateReport, Preset, Scenario, Simulation};
use cablesync::Error;

/// Joints per exoskeleton: left hip, left knee, right hip, right knee.
pub const CS_JOINTS: usize = 4;
/// Motors per exoskeleton; motor `2j` flexes joint `j` and `2j + 1` extends it.
pub const CS_MOTORS: usize = 8;

const _: () = assert!(CS_JOINTS == JOINTS && CS_MOTORS == MOTORS);

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Unknown preset, malformed configuration or invalid parameter.
    InvalidConfig = 3,
    /// Reading or writing a file failed.
    Io = 4,
    /// An index was past the end.
    OutOfRange = 5,
    /// The library panicked; the handle involved should be freed.
    Internal = 6,
}

/// A scenario description.
pub struct CsScenario(Scenario);

/// A finished run with its certificate report.
pub struct CsRun {
    sim: Simulation,
    report: CertificateReport,
}

/// Outcome of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsRunSummary {
    /// Recorded ticks, including `t = 0`.
    pub ticks: usize,
    /// True when the state left the admissible region before the end.
    pub diverged: bool,
    /// Time of divergence, or the end time.
    pub t_end: f64,
    /// Every claimed certificate held.
    pub certificates_pass: bool,
    pub guub_claimed: bool,
    /// Number of joints whose follower claim was made.
    pub sync_claimed_joints: u32,
    pub switches: usize,
    pub deferrals: usize,
}

/// One logged tick. Leads are 0 for flexion and 1 for extension.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsTick {
    pub t: f64,
    pub q: [f64; CS_JOINTS],
    pub qdot: [f64; CS_JOINTS],
    pub qd: [f64; CS_JOINTS],
    pub u: [f64; CS_JOINTS],
    pub xi: [f64; CS_JOINTS],
    pub eta: [f64; CS_JOINTS],
    pub theta: [f64; CS_MOTORS],
    pub thetadot: [f64; CS_MOTORS],
    pub e: [f64; CS_JOINTS],
    pub r: [f64; CS_JOINTS],
    pub v: f64,
    pub v_rho: [f64; CS_JOINTS],
    pub lead: [u8; CS_JOINTS],
}

/// Follower gain conditions of one joint against its desired trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CsGainCheck {
    pub c1: f64,
    pub c2: f64,
    pub k3_margin: f64,
    pub k4_margin: f64,
    pub k3_pass: bool,
    pub k4_pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CsStatus, msg: impl AsRef<str>) -> CsStatus {
    set_error(msg.as_ref());
    status
}

fn status_of(err: &Error) -> CsStatus {
    match err {
        Error::Io(_) => CsStatus::Io,
        _ => CsStatus::InvalidConfig,
    }
}

fn guard(f: impl FnOnce() -> CsStatus) -> CsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CsStatus::Internal, "internal panic"),
    }
}

/// Borrows a C string as UTF-8.
///
/// # Safety
/// `s` must be null or point to a NUL-terminated string valid for `'a`.
unsafe fn utf8<'a>(s: *const c_char, what: &str) -> Result<&'a str, CsStatus> {
    if s.is_null() {
        return Err(fail(CsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(CsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Message of the last failure on the calling thread, empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn store_scenario(s: Scenario, out: *mut *mut CsScenario) -> CsStatus {
    if let Err(e) = s.validate() {
        return fail(CsStatus::InvalidConfig, e.to_string());
    }
    // SAFETY: callers check `out` for null before building the scenario.
    unsafe { *out = Box::into_raw(Box::new(CsScenario(s))) };
    CsStatus::Ok
}

/// Creates a built-in scenario (`nominal`, `perturbed` or `paper_v`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_from_preset(name: *const c_char, out: *mut *mut CsScenario) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        let name = match utf8(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match name.parse::<Preset>() {
            Ok(p) => store_scenario(Scenario::preset(p), out),
            Err(e) => fail(CsStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// Creates a scenario from configuration text in the `key = value` format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_from_config(text: *const c_char, out: *mut *mut CsScenario) -> CsStatus {
    guard(|| {
        if out.is_null() {
            return fail(CsStatus::NullPointer, "out is null");
        }
        let text = match utf8(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text) {
            Ok(s) => store_scenario(s, out),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Destroys a scenario. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_scenario_free(s: *mut CsScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Evaluates the follower gain conditions for each of the four joints.
/// `out` must have room for four entries; `all_pass` is optional.
///
/// # Safety
/// `s` must be a live scenario handle and `out` must point to four writable
/// `CsGainCheck` values.
#[no_mangle]
pub unsafe extern "C" fn cs_check_gains(s: *const CsScenario, out: *mut CsGainCheck, all_pass: *mut bool) -> CsStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(CsStatus::NullPointer, "scenario or out is null");
        }
        let scenario = &(*s).0;
        let checks = match scenario.derive().and_then(|d| design_gain_checks(scenario, &d)) {
            Ok(c) => c,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        for (j, c) in checks.iter().enumerate() {
            *out.add(j) = CsGainCheck {
                c1: c.chi.c1,
                c2: c.chi.c2,
                k3_margin: c.verdict.k3_margin,
                k4_margin: c.verdict.k4_margin,
                k3_pass: c.verdict.k3_pass,
                k4_pass: c.verdict.k4_pass,
            };
        }
        if !all_pass.is_null() {
            *all_pass = checks.iter().all(|c| c.verdict.pass());
        }
        CsStatus::Ok
    })
}

/// Simulates a scenario and evaluates its certificates. A divergence is not an
/// error: the run is returned and its summary reports it.
///
/// # Safety
/// `s` must be a live scenario handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_run(s: *const CsScenario, out: *mut *mut CsRun) -> CsStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(CsStatus::NullPointer, "scenario or out is null");
        }
        match run(&(*s).0) {
            Ok((sim, report)) => {
                *out = Box::into_raw(Box::new(CsRun { sim, report }));
                CsStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Destroys a run. Null is ignored.
///
/// # Safety
/// `r` must be null or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_run_free(r: *mut CsRun) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of logged ticks, 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn cs_run_tick_count(r: *const CsRun) -> usize {
    r.as_ref().map_or(0, |r| r.sim.log.len())
}

/// # Safety
/// `r` must be a live run handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_run_summary(r: *const CsRun, out: *mut CsRunSummary) -> CsStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else {
            return fail(CsStatus::NullPointer, "run or out is null");
        };
        let rep = &r.report;
        *out = CsRunSummary {
            ticks: r.sim.log.len(),
            diverged: r.sim.divergence.is_some(),
            t_end: rep.t_end,
            certificates_pass: rep.pass(),
            guub_claimed: rep.guub.claimed,
            sync_claimed_joints: rep.sync.joints.iter().filter(|j| j.claimed).count() as u32,
            switches: r.sim.switches.len(),
            deferrals: r.sim.deferrals.len(),
        };
        CsStatus::Ok
    })
}

/// Copies tick `index` into `out`.
///
/// # Safety
/// `r` must be a live run handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_run_tick(r: *const CsRun, index: usize, out: *mut CsTick) -> CsStatus {
    guard(|| {
        let (Some(r), false) = (r.as_ref(), out.is_null()) else {
            return fail(CsStatus::NullPointer, "run or out is null");
        };
        let Some(rec) = r.sim.log.get(index) else {
            return fail(CsStatus::OutOfRange, format!("tick {index} of {}", r.sim.log.len()));
        };
        let arr = |v: &cablesync::dynamics::Vec4| [v[0], v[1], v[2], v[3]];
        *out = CsTick {
            t: rec.t,
            q: arr(&rec.q),
            qdot: arr(&rec.qdot),
            qd: arr(&rec.qd),
            u: arr(&rec.u),
            xi: arr(&rec.xi),
            eta: arr(&rec.eta),
            theta: rec.theta,
            thetadot: rec.thetadot,
            e: rec.e,
            r: rec.r,
            v: rec.v,
            v_rho: rec.v_rho,
            lead: rec.lead.map(|l| u8::from(l == Role::Extension)),
        };
        CsStatus::Ok
    })
}

/// The certificate report as `key: value` lines. Free the result with
/// [`cs_string_free`]. Returns null for a null handle.
///
/// # Safety
/// `r` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn cs_run_report(r: *const CsRun) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("run is null");
        return ptr::null_mut();
    };
    catch_unwind(AssertUnwindSafe(|| CString::new(r.report.to_text()).map_or(ptr::null_mut(), CString::into_raw)))
        .unwrap_or(ptr::null_mut())
}

/// Writes the per-tick log as CSV to `path`.
///
/// # Safety
/// `r` must be a live run handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cs_run_write_csv(r: *const CsRun, path: *const c_char) -> CsStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(CsStatus::NullPointer, "run is null");
        };
        let path = match utf8(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let written = File::create(path).map_err(Error::from).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_log(&mut w, &r.sim.log)?;
            w.flush()?;
            Ok(())
        });
        match written {
            Ok(()) => CsStatus::Ok,
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
