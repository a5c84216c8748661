//! Motor systems and the switched torque map between lead motors and joints.
//!
//! Each joint is driven by an antagonistic pair: one flexion and one extension
//! motor. Motor `2j` is the flexion motor of joint `j`, motor `2j + 1` the
//! extension motor. Motor angles are expressed pulley-side in joint-equivalent
//! units, so a synchronized pair has equal angles.
//!
//! The lead motor is rigidly coupled to its joint through the transmission.
//! The follower is an independent second-order system driven by the
//! synchronization input.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{ExoState, Mat4, Vec4, JOINTS};
use crate::error::{ensure_finite, Error, Result};

pub const MOTORS: usize = 2 * JOINTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Flexion,
    Extension,
}

impl Role {
    pub fn other(self) -> Self {
        match self {
            Role::Flexion => Role::Extension,
            Role::Extension => Role::Flexion,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Flexion => "flexion",
            Role::Extension => "extension",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flexion" | "fl" => Ok(Role::Flexion),
            "extension" | "ex" => Ok(Role::Extension),
            other => Err(Error::InvalidInput(format!("unknown motor role `{other}`"))),
        }
    }
}

/// Index of the motor with the given role on joint `joint`.
pub fn motor_index(joint: usize, role: Role) -> usize {
    match role {
        Role::Flexion => 2 * joint,
        Role::Extension => 2 * joint + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorState {
    pub theta: f64,
    pub thetadot: f64,
}

/// `d_n(t) = offset + amplitude sin(2 pi frequency t + phase)`: a friction
/// level plus ripple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorDisturbance {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl MotorDisturbance {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }

    pub fn range(&self) -> (f64, f64) {
        let a = self.amplitude.abs();
        (self.offset - a, self.offset + a)
    }
}

/// Admissible intervals for the motor constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorLimits {
    pub inertia: (f64, f64),
    pub damping: (f64, f64),
    pub disturbance: (f64, f64),
    pub effectiveness: (f64, f64),
}

impl Default for MotorLimits {
    fn default() -> Self {
        Self {
            inertia: (0.015, 0.03),
            damping: (0.01, 0.04),
            disturbance: (0.0, 0.06),
            effectiveness: (0.8, 1.2),
        }
    }
}

impl MotorLimits {
    pub fn validate(&self) -> Result<()> {
        let intervals = [
            ("inertia", self.inertia),
            ("damping", self.damping),
            ("disturbance", self.disturbance),
            ("effectiveness", self.effectiveness),
        ];
        for (name, (lo, hi)) in intervals {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameter(format!("motor {name} interval is empty")));
            }
        }
        if self.inertia.0 <= 0.0 || self.effectiveness.0 <= 0.0 {
            return Err(Error::InvalidParameter("motor inertia and effectiveness limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorParams {
    /// Pulley-side inertia (kg m^2).
    pub inertia: f64,
    /// Viscous damping (N m s/rad).
    pub damping: f64,
    pub disturbance: MotorDisturbance,
    /// Control effectiveness (N m per unit input).
    pub effectiveness: f64,
    pub role: Role,
    pub joint: usize,
    /// Motor angle per joint angle when leading.
    pub ratio: f64,
    /// Motor angle at zero joint angle when leading.
    pub offset: f64,
}

impl MotorParams {
    pub fn check(&self, limits: &MotorLimits) -> Result<()> {
        let d = self.disturbance;
        ensure_finite(
            "motor parameters",
            &[self.inertia, self.damping, self.effectiveness, self.ratio, self.offset, d.offset, d.amplitude, d.frequency, d.phase],
        )?;
        if self.inertia <= 0.0 {
            return Err(Error::InvalidParameter("motor inertia must be positive".into()));
        }
        if self.effectiveness <= 0.0 {
            return Err(Error::InvalidParameter("motor effectiveness must be positive".into()));
        }
        if self.joint >= JOINTS {
            return Err(Error::InvalidParameter(format!("motor joint index {} out of range", self.joint)));
        }
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        let (dlo, dhi) = d.range();
        let checks = [
            ("inertia", inside(self.inertia, limits.inertia)),
            ("damping", inside(self.damping, limits.damping)),
            ("disturbance", inside(dlo, limits.disturbance) && inside(dhi, limits.disturbance)),
            ("effectiveness", inside(self.effectiveness, limits.effectiveness)),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "motor {} of joint {}: {name} outside admissible interval",
                    self.role, self.joint
                )));
            }
        }
        Ok(())
    }
}

/// The eight motor systems, validated against their limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorBank {
    params: [MotorParams; MOTORS],
    limits: MotorLimits,
}

impl MotorBank {
    pub fn new(params: [MotorParams; MOTORS], limits: MotorLimits) -> Result<Self> {
        limits.validate()?;
        for (n, p) in params.iter().enumerate() {
            p.check(&limits)?;
            let expected_joint = n / 2;
            let expected_role = if n % 2 == 0 { Role::Flexion } else { Role::Extension };
            if p.joint != expected_joint || p.role != expected_role {
                return Err(Error::InvalidParameter(format!(
                    "motor {n} must be the {expected_role} motor of joint {expected_joint}"
                )));
            }
        }
        Ok(Self { params, limits })
    }

    pub fn params(&self) -> &[MotorParams; MOTORS] {
        &self.params
    }

    pub fn limits(&self) -> &MotorLimits {
        &self.limits
    }

    pub fn get(&self, joint: usize, role: Role) -> &MotorParams {
        &self.params[motor_index(joint, role)]
    }
}

impl Default for MotorBank {
    fn default() -> Self {
        let inertia = [0.020, 0.022, 0.018, 0.021];
        let damping = [0.020, 0.025, 0.020, 0.025];
        let effectiveness = [1.0, 0.95, 1.05, 0.9];
        let params = std::array::from_fn(|n| {
            let side = n % 4;
            MotorParams {
                inertia: inertia[side],
                damping: damping[side],
                disturbance: MotorDisturbance {
                    offset: 0.03,
                    amplitude: 0.01,
                    frequency: 0.3,
                    phase: 0.7 * n as f64,
                },
                effectiveness: effectiveness[side],
                role: if n % 2 == 0 { Role::Flexion } else { Role::Extension },
                joint: n / 2,
                ratio: 1.0,
                offset: 0.0,
            }
        });
        Self::new(params, MotorLimits::default()).expect("default motor bank is admissible")
    }
}

/// Lead and follower flags per motor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchSignals {
    pub sigma: [u8; MOTORS],
    pub sigma_bar: [u8; MOTORS],
}

impl SwitchSignals {
    pub fn from_leads(leads: &[Role; JOINTS]) -> Self {
        let mut sigma = [0u8; MOTORS];
        for (j, role) in leads.iter().enumerate() {
            sigma[motor_index(j, *role)] = 1;
        }
        Self { sigma, sigma_bar: sigma.map(|s| 1 - s) }
    }

    /// Lead role per joint, or an error when a pair has zero or two leads or
    /// the follower flags are not complementary.
    pub fn leads(&self) -> Result<[Role; JOINTS]> {
        for n in 0..MOTORS {
            if self.sigma[n] > 1 || self.sigma[n] + self.sigma_bar[n] != 1 {
                return Err(Error::InvariantViolation(format!("motor {n}: sigma_bar must equal 1 - sigma")));
            }
        }
        let mut leads = [Role::Flexion; JOINTS];
        for (j, lead) in leads.iter_mut().enumerate() {
            let fl = self.sigma[motor_index(j, Role::Flexion)];
            let ex = self.sigma[motor_index(j, Role::Extension)];
            *lead = match (fl, ex) {
                (1, 0) => Role::Flexion,
                (0, 1) => Role::Extension,
                _ => {
                    return Err(Error::InvariantViolation(format!(
                        "joint {j} must have exactly one lead motor"
                    )))
                }
            };
        }
        Ok(leads)
    }
}

/// Follower acceleration `(B u sigma_bar - D thetadot - d(t)) / J`.
pub fn motor_accel(m: &MotorState, p: &MotorParams, u_n: f64, sigma_bar_n: u8, t: f64) -> f64 {
    (p.effectiveness * u_n * f64::from(sigma_bar_n) - p.damping * m.thetadot - p.disturbance.eval(t)) / p.inertia
}

/// Switched effectiveness matrix: diagonal, each joint weighted by its lead motor.
pub fn b_sigma(signals: &SwitchSignals, motors: &MotorBank) -> Result<Mat4> {
    let leads = signals.leads()?;
    Ok(Mat4::from_diagonal(&Vec4::from_fn(|j, _| motors.get(j, leads[j]).effectiveness)))
}

/// Joint torque transmitted by the lead motors. Positive input is flexion
/// torque whichever motor leads.
pub fn exo_torque(u: &Vec4, signals: &SwitchSignals, motors: &MotorBank) -> Result<Vec4> {
    Ok(b_sigma(signals, motors)? * u)
}

/// Angle and velocity of a lead motor rigidly coupled to its joint.
pub fn lead_motor_kinematics(s: &ExoState, joint: usize, p: &MotorParams) -> MotorState {
    lead_state(s.q[joint], s.qdot[joint], p.ratio, p.offset)
}

pub(crate) fn lead_state(q: f64, qdot: f64, ratio: f64, offset: f64) -> MotorState {
    MotorState { theta: ratio * q + offset, thetadot: ratio * qdot }
}
