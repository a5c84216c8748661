#ifndef CABLESYNC_H
#define CABLESYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Joints per exoskeleton: left hip, left knee, right hip, right knee.
#define CS_JOINTS 4

// Motors per exoskeleton; motor `2j` flexes joint `j` and `2j + 1` extends it.
#define CS_MOTORS 8

// Result codes.
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  // A required pointer argument was null.
  CS_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  CS_STATUS_INVALID_UTF8 = 2,
  // Unknown preset, malformed configuration or invalid parameter.
  CS_STATUS_INVALID_CONFIG = 3,
  // Reading or writing a file failed.
  CS_STATUS_IO = 4,
  // An index was past the end.
  CS_STATUS_OUT_OF_RANGE = 5,
  // The library panicked; the handle involved should be freed.
  CS_STATUS_INTERNAL = 6,
} CsStatus;

// A finished run with its certificate report.
typedef struct CsRun CsRun;

// A scenario description.
typedef struct CsScenario CsScenario;

// Follower gain conditions of one joint against its desired trajectory.
typedef struct CsGainCheck {
  double c1;
  double c2;
  double k3_margin;
  double k4_margin;
  bool k3_pass;
  bool k4_pass;
} CsGainCheck;

// Outcome of a run.
typedef struct CsRunSummary {
  // Recorded ticks, including `t = 0`.
  size_t ticks;
  // True when the state left the admissible region before the end.
  bool diverged;
  // Time of divergence, or the end time.
  double t_end;
  // Every claimed certificate held.
  bool certificates_pass;
  bool guub_claimed;
  // Number of joints whose follower claim was made.
  uint32_t sync_claimed_joints;
  size_t switches;
  size_t deferrals;
} CsRunSummary;

// One logged tick. Leads are 0 for flexion and 1 for extension.
typedef struct CsTick {
  double t;
  double q[CS_JOINTS];
  double qdot[CS_JOINTS];
  double qd[CS_JOINTS];
  double u[CS_JOINTS];
  double xi[CS_JOINTS];
  double eta[CS_JOINTS];
  double theta[CS_MOTORS];
  double thetadot[CS_MOTORS];
  double e[CS_JOINTS];
  double r[CS_JOINTS];
  double v;
  double v_rho[CS_JOINTS];
  uint8_t lead[CS_JOINTS];
} CsTick;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on the calling thread, empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *cs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cs_version(void);

// Creates a built-in scenario (`nominal`, `perturbed` or `paper_v`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum CsStatus cs_scenario_from_preset(const char *name, struct CsScenario **out);

// Creates a scenario from configuration text in the `key = value` format.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a writable pointer.
enum CsStatus cs_scenario_from_config(const char *text, struct CsScenario **out);

// Destroys a scenario. Null is ignored.
//
// # Safety
// `s` must be null or a handle from this library that was not yet freed.
void cs_scenario_free(struct CsScenario *s);

// Evaluates the follower gain conditions for each of the four joints.
// `out` must have room for four entries; `all_pass` is optional.
//
// # Safety
// `s` must be a live scenario handle and `out` must point to four writable
// `CsGainCheck` values.
enum CsStatus cs_check_gains(const struct CsScenario *s, struct CsGainCheck *out, bool *all_pass);

// Simulates a scenario and evaluates its certificates. A divergence is not an
// error: the run is returned and its summary reports it.
//
// # Safety
// `s` must be a live scenario handle and `out` a writable pointer.
enum CsStatus cs_run(const struct CsScenario *s, struct CsRun **out);

// Destroys a run. Null is ignored.
//
// # Safety
// `r` must be null or a handle from this library that was not yet freed.
void cs_run_free(struct CsRun *r);

// Number of logged ticks, 0 for a null handle.
//
// # Safety
// `r` must be null or a live run handle.
size_t cs_run_tick_count(const struct CsRun *r);

// # Safety
// `r` must be a live run handle and `out` a writable pointer.
enum CsStatus cs_run_summary(const struct CsRun *r, struct CsRunSummary *out);

// Copies tick `index` into `out`.
//
// # Safety
// `r` must be a live run handle and `out` a writable pointer.
enum CsStatus cs_run_tick(const struct CsRun *r, size_t index, struct CsTick *out);

// The certificate report as `key: value` lines. Free the result with
// [`cs_string_free`]. Returns null for a null handle.
//
// # Safety
// `r` must be null or a live run handle.
char *cs_run_report(const struct CsRun *r);

// Writes the per-tick log as CSV to `path`.
//
// # Safety
// `r` must be a live run handle and `path` a NUL-terminated string.
enum CsStatus cs_run_write_csv(const struct CsRun *r, const char *path);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library that was not yet freed.
void cs_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CABLESYNC_H */
