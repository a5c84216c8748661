//! Runtime checks of the Lyapunov envelopes and the dwell condition on a
//! recorded log.
//!
//! Every monitor recomputes what it needs from the logged states. A claim is
//! only asserted when its hypotheses held over the whole log; otherwise the
//! verdict is reported as withheld, which is not a failure.

use crate::dynamics::{mass_matrix_unchecked, ExoState, JOINTS};
use crate::joint::{lumped_uncertainty, rho, RhoCoeffs};
use crate::switching::{dwell_certificate, DwellConfig, DwellVerdict, SwitchEvent};
use crate::motor::{motor_index, Role};
use crate::sync::{
    check_gain_conditions, chi_bounds_from_params, sync_errors, ChiBounds, GainVerdict, LeadEnvelope, SyncErrors,
};

use crate::error::Result;

use super::log::TickRecord;
use super::scenario::{Derived, Scenario};

/// Absolute slack for envelopes that decay to zero.
const ABS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GuubReport {
    pub enabled: bool,
    pub claimed: bool,
    /// Robust bound coefficients in use.
    pub rho: RhoCoeffs,
    /// `|chi + xi| <= rho(|z1|)` at every tick.
    pub rho_dominated: bool,
    pub rho_worst_ratio: f64,
    pub first_rho_violation: Option<f64>,
    /// `B_lower >= 1/4`, needed to pass from `eps / (4 B_lower)` to `eps`.
    pub b_lower_ok: bool,
    pub saturation_free: bool,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub v0: f64,
    /// Largest `(V - envelope) / envelope`.
    pub max_violation: f64,
    pub envelope_ok: bool,
    /// `sqrt(epsilon / (delta a))`.
    pub ultimate_bound: f64,
    /// Start of the window where the transient term is below 1% of `eps/delta`.
    pub steady_from: Option<f64>,
    pub steady_xi_max: f64,
    pub ultimate_ok: bool,
}

impl GuubReport {
    pub fn pass(&self) -> bool {
        !self.claimed || (self.envelope_ok && self.ultimate_ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncJointReport {
    pub lead_envelope: LeadEnvelope,
    pub chi: ChiBounds,
    pub gains: GainVerdict,
    pub claimed: bool,
    pub intervals: usize,
    pub checked_ticks: usize,
    /// Largest `(|z2| - envelope) / envelope` over checked ticks.
    pub max_violation: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncReport {
    pub enabled: bool,
    pub boundary_layer: f64,
    pub a_rho: f64,
    pub b_rho: f64,
    pub lambda_rho: f64,
    pub joints: Vec<SyncJointReport>,
}

impl SyncReport {
    pub fn pass(&self) -> bool {
        self.joints.iter().all(|j| !j.claimed || j.ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DwellReport {
    pub enabled: bool,
    pub config: DwellConfig,
    pub verdict: DwellVerdict,
    pub deferrals: usize,
    /// Consecutive switches of one joint closer than `min_hold`.
    pub hold_violations: usize,
}

impl DwellReport {
    pub fn pass(&self) -> bool {
        !self.enabled || (self.verdict.pass() && self.hold_violations == 0)
    }
}

/// Log-derived tracking summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSummary {
    pub xi_max: f64,
    pub e_max: f64,
    /// Max `|xi|` over the last ten periods over the max over periods 2 to 11.
    pub growth_ratio: Option<f64>,
    /// `|e|` is no larger in the second half of every inter-switch interval
    /// than in the first half.
    pub sync_decays: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub preset: String,
    pub ticks: usize,
    pub t_end: f64,
    pub diverged: Option<String>,
    pub guub: GuubReport,
    pub sync: SyncReport,
    pub dwell: DwellReport,
    pub tracking: TrackingSummary,
}

impl CertificateReport {
    /// True when every claimed certificate holds and the run completed.
    pub fn pass(&self) -> bool {
        self.diverged.is_none() && self.guub.pass() && self.sync.pass() && self.dwell.pass()
    }
}

fn excess(value: f64, envelope: f64) -> f64 {
    (value - ABS_TOL - envelope) / envelope.max(f64::MIN_POSITIVE)
}

pub fn monitor_guub(log: &[TickRecord], scenario: &Scenario, derived: &Derived) -> GuubReport {
    let b_consts = &derived.bounds;
    let g = scenario.joint.gains;
    let a = 0.5_f64.min(0.5 * b_consts.c_m);
    let b = 0.5_f64.max(0.5 * b_consts.c_big_m);
    let delta = g.alpha.min(b_consts.b_lower * g.k1) / b;
    let eps = g.epsilon;
    let p = &scenario.plant;
    let t0 = log.first().map_or(0.0, |r| r.t);

    let mut rho_worst_ratio: f64 = 0.0;
    let mut first_rho_violation = None;
    let mut max_violation = f64::NEG_INFINITY;
    let mut steady_from = None;
    let mut steady_xi_max: f64 = 0.0;
    let mut v0 = 0.0;
    for (i, rec) in log.iter().enumerate() {
        let xi = rec.qd - rec.q;
        let xidot = rec.qdot_d - rec.qdot;
        let eta = xidot + g.alpha * xi;
        let m = mass_matrix_unchecked(&rec.q, p);
        let v = 0.5 * xi.norm_squared() + 0.5 * eta.dot(&(m * eta));
        if i == 0 {
            v0 = v;
        }
        let z1 = (xi.norm_squared() + eta.norm_squared()).sqrt();
        let s = ExoState { q: rec.q, qdot: rec.qdot, t: rec.t };
        let mut chi = lumped_uncertainty(&s, &rec.qd, &rec.qdot_d, &rec.qddot_d, g.alpha, p);
        for j in 0..JOINTS {
            if scenario.clamp[j] {
                chi[j] = 0.0;
            }
        }
        let lhs = (chi + xi).norm();
        let bound = rho(z1, &derived.rho);
        let ratio = if bound > 0.0 { lhs / bound } else if lhs > 0.0 { f64::INFINITY } else { 0.0 };
        rho_worst_ratio = rho_worst_ratio.max(ratio);
        if lhs > bound * (1.0 + 1e-9) && first_rho_violation.is_none() {
            first_rho_violation = Some(rec.t);
        }

        let decay = (-delta * (rec.t - t0)).exp();
        let env = v0 * decay + eps / delta * (1.0 - decay);
        max_violation = max_violation.max(excess(v, env));
        if v0 * decay <= 0.01 * eps / delta {
            steady_from.get_or_insert(rec.t);
            steady_xi_max = steady_xi_max.max(xi.norm());
        }
    }
    let ultimate_bound = (eps / (delta * a)).sqrt();
    let tol = scenario.monitor.tolerance;
    let rho_dominated = first_rho_violation.is_none();
    let b_lower_ok = b_consts.b_lower >= 0.25;
    let saturation_free = log.iter().all(|r| !r.saturated);
    GuubReport {
        enabled: scenario.monitor.guub,
        claimed: scenario.monitor.guub && rho_dominated && b_lower_ok && saturation_free,
        rho: derived.rho,
        rho_dominated,
        rho_worst_ratio,
        first_rho_violation,
        b_lower_ok,
        saturation_free,
        delta,
        a,
        b,
        v0,
        max_violation: if log.is_empty() { 0.0 } else { max_violation },
        envelope_ok: max_violation <= tol,
        ultimate_bound,
        steady_from,
        steady_xi_max,
        ultimate_ok: steady_xi_max <= ultimate_bound * (1.0 + tol),
    }
}

/// Synchronization errors recomputed from the logged motor states.
fn pair_errors(rec: &TickRecord, j: usize, beta: f64) -> SyncErrors {
    let (fl, ex) = (motor_index(j, Role::Flexion), motor_index(j, Role::Extension));
    sync_errors(rec.theta[fl], rec.theta[ex], rec.thetadot[fl], rec.thetadot[ex], beta)
}

/// Indices where each joint's inter-switch intervals start.
fn interval_starts(log: &[TickRecord], j: usize) -> Vec<usize> {
    if log.is_empty() {
        return Vec::new();
    }
    let mut starts = vec![0];
    starts.extend((1..log.len()).filter(|&i| log[i].lead[j] != log[i - 1].lead[j]));
    starts
}

pub fn monitor_sync(log: &[TickRecord], scenario: &Scenario, derived: &Derived) -> SyncReport {
    let bank = &derived.motors;
    let beta = scenario.sync.gains.beta;
    let phi = scenario.sync.boundary_layer;
    let lambda = derived.dwell.lambda_rho;
    let gain = (derived.b_rho / derived.a_rho).sqrt();
    let tol = scenario.monitor.tolerance;
    let mut joints = Vec::with_capacity(JOINTS);
    for j in 0..JOINTS {
        let mut env = LeadEnvelope { thetadot_max: 0.0, thetaddot_max: 0.0 };
        for rec in log {
            let ratio = bank.get(j, rec.lead[j]).ratio.abs();
            env.thetadot_max = env.thetadot_max.max(ratio * rec.qdot[j].abs());
            env.thetaddot_max = env.thetaddot_max.max(ratio * rec.qddot[j].abs());
        }
        let chi = chi_bounds_from_params(&derived.bounds, &env, beta)
            .unwrap_or(ChiBounds { c1: f64::INFINITY, c2: f64::INFINITY });
        let gains = check_gain_conditions(&scenario.sync.gains, &chi, derived.bounds.b_lower)
            .expect("B_lower is validated positive");
        let starts = interval_starts(log, j);
        let mut max_violation = f64::NEG_INFINITY;
        let mut checked_ticks = 0;
        for (w, &start) in starts.iter().enumerate() {
            let end = starts.get(w + 1).copied().unwrap_or(log.len());
            let anchor = &log[start];
            let z0 = pair_errors(anchor, j, beta).z2_norm;
            for rec in &log[start..end] {
                let se = pair_errors(rec, j, beta);
                if phi > 0.0 && se.r.abs() <= phi {
                    continue;
                }
                checked_ticks += 1;
                let bound = gain * (-0.5 * lambda * (rec.t - anchor.t)).exp() * z0;
                max_violation = max_violation.max(excess(se.z2_norm, bound));
            }
        }
        let claimed = scenario.monitor.sync && gains.pass();
        joints.push(SyncJointReport {
            lead_envelope: env,
            chi,
            gains,
            claimed,
            intervals: starts.len(),
            checked_ticks,
            max_violation: if checked_ticks == 0 { 0.0 } else { max_violation },
            ok: max_violation <= tol,
        });
    }
    SyncReport {
        enabled: scenario.monitor.sync,
        boundary_layer: phi,
        a_rho: derived.a_rho,
        b_rho: derived.b_rho,
        lambda_rho: lambda,
        joints,
    }
}

/// Follower gain conditions of one joint before any run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignGainCheck {
    pub lead_envelope: LeadEnvelope,
    pub chi: ChiBounds,
    pub verdict: GainVerdict,
}

/// Gain conditions for the lead envelope implied by the desired trajectory
/// rather than a realized log. Either motor of a joint may lead, so the
/// larger transmission ratio is used.
pub fn design_gain_checks(scenario: &Scenario, derived: &Derived) -> Result<[DesignGainCheck; JOINTS]> {
    let mut out = Vec::with_capacity(JOINTS);
    for (j, traj) in scenario.traj.iter().enumerate() {
        let ratio = [Role::Flexion, Role::Extension]
            .iter()
            .map(|r| derived.motors.get(j, *r).ratio.abs())
            .fold(0.0, f64::max);
        let lead_envelope = LeadEnvelope { thetadot_max: ratio * traj.speed_max(), thetaddot_max: ratio * traj.accel_max() };
        let chi = chi_bounds_from_params(&derived.bounds, &lead_envelope, scenario.sync.gains.beta)?;
        let verdict = check_gain_conditions(&scenario.sync.gains, &chi, derived.bounds.b_lower)?;
        out.push(DesignGainCheck { lead_envelope, chi, verdict });
    }
    Ok(out.try_into().expect("one check per joint"))
}

pub fn monitor_dwell(switches: &[SwitchEvent], deferrals: usize, t_end: f64, scenario: &Scenario, derived: &Derived) -> DwellReport {
    let cfg = derived.dwell;
    let verdict = dwell_certificate(switches, &cfg, t_end).expect("dwell configuration is validated");
    let mut hold_violations = 0;
    if cfg.min_hold > 0.0 {
        for j in 0..JOINTS {
            let times: Vec<f64> = switches.iter().filter(|ev| ev.joint == j).map(|ev| ev.time).collect();
            hold_violations += times.windows(2).filter(|w| w[1] - w[0] < cfg.min_hold * (1.0 - 1e-12)).count();
        }
    }
    DwellReport { enabled: scenario.monitor.dwell, config: cfg, verdict, deferrals, hold_violations }
}

/// Periodicity and follower-decay summary of a log.
pub fn tracking_summary(log: &[TickRecord], scenario: &Scenario) -> TrackingSummary {
    let xi_norm = |r: &TickRecord| r.xi.norm();
    let xi_max = log.iter().map(xi_norm).fold(0.0, f64::max);
    let e_max = log.iter().flat_map(|r| r.e).map(f64::abs).fold(0.0, f64::max);
    let period = scenario
        .traj
        .iter()
        .zip(&scenario.clamp)
        .filter(|(tr, c)| tr.amp > 0.0 && !**c)
        .map(|(tr, _)| tr.period)
        .fold(0.0, f64::max);
    let t_end = log.last().map_or(0.0, |r| r.t);
    let growth_ratio = (period > 0.0 && t_end >= 20.0 * period - 1e-9).then(|| {
        let window_max = |from: f64, to: f64| {
            log.iter().filter(|r| r.t >= from && r.t <= to).map(xi_norm).fold(0.0, f64::max)
        };
        let early = window_max(period, 11.0 * period);
        let late = window_max(t_end - 10.0 * period, t_end);
        if early > 0.0 { late / early } else if late > 0.0 { f64::INFINITY } else { 1.0 }
    });
    // Inside a boundary layer |r| only settles below phi, so |e| settles
    // below phi / beta rather than to zero.
    let floor = if scenario.sync.boundary_layer > 0.0 {
        scenario.sync.boundary_layer / scenario.sync.gains.beta
    } else {
        1e-6
    };
    let sync_decays = (0..JOINTS).all(|j| {
        let starts = interval_starts(log, j);
        starts.iter().enumerate().all(|(w, &start)| {
            let end = starts.get(w + 1).copied().unwrap_or(log.len());
            let seg = &log[start..end];
            if seg.len() < 2 {
                return true;
            }
            let mid = seg.len() / 2;
            let first = seg[..mid].iter().map(|r| r.e[j].abs()).fold(0.0, f64::max);
            let second = seg[mid..].iter().map(|r| r.e[j].abs()).fold(0.0, f64::max);
            second <= first || second <= floor
        })
    });
    TrackingSummary { xi_max, e_max, growth_ratio, sync_decays }
}

/// Runs every monitor over a log.
pub fn certify(
    log: &[TickRecord],
    switches: &[SwitchEvent],
    deferrals: usize,
    diverged: Option<String>,
    scenario: &Scenario,
    derived: &Derived,
) -> CertificateReport {
    let t_end = log.last().map_or(0.0, |r| r.t);
    CertificateReport {
        preset: scenario.preset.name().to_string(),
        ticks: log.len(),
        t_end,
        diverged,
        guub: monitor_guub(log, scenario, derived),
        sync: monitor_sync(log, scenario, derived),
        dwell: monitor_dwell(switches, deferrals, t_end, scenario, derived),
        tracking: tracking_summary(log, scenario),
    }
}
