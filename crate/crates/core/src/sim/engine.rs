//! The closed-loop simulation.
//!
//! Each tick reads the state, computes the joint input, allocates lead
//! roles, records, and then advances one RK4 step. The joint input and the
//! roles are held over the step; follower inputs are re-evaluated at every
//! RK4 stage. Lead motors are rigidly coupled to their joints and are
//! re-projected onto the joint angle after every step.

use nalgebra::SVector;

use crate::dynamics::{forward_dynamics_locked, mass_matrix_unchecked, ExoState, Vec4, JOINTS};
use crate::error::{Error, Result};
use crate::joint::{joint_control, joint_errors, saturate};
use crate::motor::{exo_torque, lead_state, motor_accel, motor_index, MotorBank, MotorState, Role, MOTORS};
use crate::switching::{allocate, AllocationState, Deferral, SwitchEvent};
use crate::sync::{control_extension_smoothed, sync_errors, SyncErrors};

use super::log::TickRecord;
use super::scenario::{Derived, Scenario};
use super::trajectory::desired_trajectory;
use super::integrator::rk4_step;

const STATE: usize = 8 + 2 * MOTORS;
type State = SVector<f64, STATE>;

const Q: usize = 0;
const QDOT: usize = 4;
const THETA: usize = 8;
const THETADOT: usize = 8 + MOTORS;

/// A finished or aborted run. `divergence` is set when the state left the
/// admissible region; the log then ends at the last good tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub derived: Derived,
    pub log: Vec<TickRecord>,
    pub switches: Vec<SwitchEvent>,
    pub deferrals: Vec<Deferral>,
    pub divergence: Option<Error>,
}

fn joint_vec(x: &State, offset: usize) -> Vec4 {
    x.fixed_rows::<4>(offset).into()
}

fn pair_errors(x: &State, j: usize, beta: f64) -> SyncErrors {
    let (fl, ex) = (motor_index(j, Role::Flexion), motor_index(j, Role::Extension));
    sync_errors(x[THETA + fl], x[THETA + ex], x[THETADOT + fl], x[THETADOT + ex], beta)
}

/// Input of the follower motor of joint `j` given its lead role.
fn follower_input(s: &SyncErrors, lead: Role, scenario: &Scenario) -> f64 {
    let u_ex = control_extension_smoothed(s, &scenario.sync.gains, scenario.sync.boundary_layer);
    match lead {
        Role::Flexion => u_ex,
        Role::Extension => -u_ex,
    }
}

struct Loop<'a> {
    scenario: &'a Scenario,
    bank: MotorBank,
    free: [bool; JOINTS],
    /// Lead-motor angle at zero joint angle, re-latched at every takeover.
    offsets: [f64; MOTORS],
}

impl Loop<'_> {
    fn exo_state(&self, x: &State, t: f64) -> ExoState {
        ExoState { q: joint_vec(x, Q), qdot: joint_vec(x, QDOT), t }
    }

    fn qddot(&self, x: &State, tau: &Vec4, t: f64) -> Result<Vec4> {
        forward_dynamics_locked(&self.exo_state(x, t), tau, &self.scenario.plant, self.free)
    }

    fn rhs(&self, t: f64, x: &State, tau: &Vec4, leads: &[Role; JOINTS]) -> Result<State> {
        let qddot = self.qddot(x, tau, t)?;
        let mut dx = State::zeros();
        dx.fixed_rows_mut::<4>(Q).copy_from(&joint_vec(x, QDOT));
        dx.fixed_rows_mut::<4>(QDOT).copy_from(&qddot);
        let params = self.bank.params();
        let beta = self.scenario.sync.gains.beta;
        for (j, lead) in leads.iter().enumerate() {
            let l = motor_index(j, *lead);
            let f = motor_index(j, lead.other());
            dx[THETA + l] = params[l].ratio * x[QDOT + j];
            dx[THETADOT + l] = params[l].ratio * qddot[j];
            let u_f = follower_input(&pair_errors(x, j, beta), *lead, self.scenario);
            let m = MotorState { theta: x[THETA + f], thetadot: x[THETADOT + f] };
            dx[THETA + f] = m.thetadot;
            dx[THETADOT + f] = motor_accel(&m, &params[f], u_f, 1, t);
        }
        Ok(dx)
    }

    fn project_leads(&self, x: &mut State, leads: &[Role; JOINTS]) {
        let params = self.bank.params();
        for (j, lead) in leads.iter().enumerate() {
            let l = motor_index(j, *lead);
            let m = lead_state(x[Q + j], x[QDOT + j], params[l].ratio, self.offsets[l]);
            x[THETA + l] = m.theta;
            x[THETADOT + l] = m.thetadot;
        }
    }
}

fn check_state(x: &State, t: f64, scenario: &Scenario) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { t, reason: "non-finite state".into() });
    }
    for j in 0..JOINTS {
        let (lo, hi) = scenario.plant.stops[j];
        if x[Q + j] < lo || x[Q + j] > hi {
            return Err(Error::Diverged { t, reason: format!("joint {j} left its mechanical stops") });
        }
    }
    Ok(())
}

/// Runs the scenario. Configuration problems are returned as errors; a
/// divergence during the run is reported inside the returned value.
pub fn simulate(scenario: &Scenario) -> Result<Simulation> {
    let derived = scenario.derive()?;
    let bank = derived.motors;
    let lp = Loop {
        scenario,
        bank,
        free: scenario.clamp.map(|c| !c),
        offsets: bank.params().map(|p| p.offset),
    };
    let mut lp = lp;
    let h = scenario.step;
    let n = scenario.ticks();
    let gains = scenario.joint.gains;
    let beta = scenario.sync.gains.beta;
    let params = *bank.params();

    let d0 = desired_trajectory(&scenario.traj, 0.0);
    let mut x = State::zeros();
    for j in 0..JOINTS {
        let (dq, dv) = if scenario.clamp[j] { (0.0, 0.0) } else { (scenario.init.q_offset[j], scenario.init.qdot_offset[j]) };
        x[Q + j] = d0.q[j] + dq;
        x[QDOT + j] = if scenario.clamp[j] { 0.0 } else { d0.qdot[j] + dv };
    }
    check_state(&x, 0.0, scenario).map_err(|_| Error::InvalidParameter("initial posture outside the mechanical stops".into()))?;

    let mut log = Vec::with_capacity(n + 1);
    let mut alloc: Option<AllocationState> = None;
    let mut divergence = None;

    for k in 0..=n {
        let t = k as f64 * h;
        let q = joint_vec(&x, Q);
        let qdot = joint_vec(&x, QDOT);
        let des = desired_trajectory(&scenario.traj, t);
        let errs = joint_errors(&q, &qdot, &des.q, &des.qdot, gains.alpha)?;
        let mut u = joint_control(&errs, &gains, &derived.rho);
        for j in 0..JOINTS {
            if scenario.clamp[j] {
                u[j] = 0.0;
            }
        }
        let (u, saturated) = match scenario.joint.saturation {
            Some(limit) => saturate(&u, limit),
            None => (u, false),
        };

        let before = alloc.as_ref().map(|a| a.leads);
        let state = match alloc.take() {
            None => {
                let a = AllocationState::from_input(&u);
                for (j, lead) in a.leads.iter().enumerate() {
                    let l = motor_index(j, *lead);
                    let f = motor_index(j, lead.other());
                    let m = lead_state(q[j], qdot[j], params[l].ratio, lp.offsets[l]);
                    x[THETA + l] = m.theta;
                    x[THETADOT + l] = m.thetadot;
                    x[THETA + f] = m.theta + scenario.init.slack[j];
                    x[THETADOT + f] = m.thetadot;
                }
                a
            }
            Some(prev) => allocate(&u, prev, t, &derived.dwell)?.1,
        };
        if let Some(before) = before {
            for j in 0..JOINTS {
                if state.leads[j] != before[j] {
                    // The new lead takes over from where it was as a follower.
                    let l = motor_index(j, state.leads[j]);
                    lp.offsets[l] = x[THETA + l] - params[l].ratio * q[j];
                    x[THETADOT + l] = params[l].ratio * qdot[j];
                }
            }
        }
        let leads = state.leads;
        let signals = state.signals();
        alloc = Some(state);

        let tau = exo_torque(&u, &signals, &bank)?;
        let qddot = lp.qddot(&x, &tau, t)?;

        let m = mass_matrix_unchecked(&q, &scenario.plant);
        let mut rec = TickRecord {
            t,
            q,
            qdot,
            qddot,
            qd: des.q,
            qdot_d: des.qdot,
            qddot_d: des.qddot,
            u,
            saturated,
            theta: std::array::from_fn(|i| x[THETA + i]),
            thetadot: std::array::from_fn(|i| x[THETADOT + i]),
            u_n: [0.0; MOTORS],
            sigma: signals.sigma,
            xi: errs.xi,
            eta: errs.eta,
            e: [0.0; JOINTS],
            r: [0.0; JOINTS],
            v: 0.5 * errs.xi.norm_squared() + 0.5 * errs.eta.dot(&(m * errs.eta)),
            v_rho: [0.0; JOINTS],
            lead: leads,
        };
        for (j, lead) in leads.iter().enumerate() {
            let se = pair_errors(&x, j, beta);
            let l = motor_index(j, *lead);
            let f = motor_index(j, lead.other());
            rec.u_n[l] = u[j];
            rec.u_n[f] = follower_input(&se, *lead, scenario);
            rec.e[j] = se.e;
            rec.r[j] = se.r;
            rec.v_rho[j] = 0.5 * se.e * se.e + 0.5 * params[f].inertia * se.r * se.r;
        }
        log.push(rec);
        if k == n {
            break;
        }

        let step = rk4_step(|ts, xs| lp.rhs(ts, xs, &tau, &leads), t, &x, h);
        let t_next = (k + 1) as f64 * h;
        match step.and_then(|mut nx| {
            lp.project_leads(&mut nx, &leads);
            check_state(&nx, t_next, scenario)?;
            Ok(nx)
        }) {
            Ok(nx) => x = nx,
            Err(e) => {
                divergence = Some(match e {
                    Error::Diverged { .. } => e,
                    other => Error::Diverged { t: t_next, reason: other.to_string() },
                });
                break;
            }
        }
    }

    let alloc = alloc.expect("at least one tick is recorded");
    Ok(Simulation { derived, log, switches: alloc.switch_log, deferrals: alloc.deferrals, divergence })
}
