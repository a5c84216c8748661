//! Simulation scenarios and the built-in presets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::bounds::{estimate_bounds, BoundConstants, EstimationSettings, StateBox};
use crate::dynamics::{PlantParams, JOINTS};
use crate::error::{ensure_finite, Error, Result};
use crate::joint::{rho_coeffs_from_bounds, JointGains, RhoCoeffs};
use crate::motor::{MotorBank, MotorLimits, MotorParams, MOTORS};
use crate::switching::{lambda_rho, rho_lyapunov_constants, DwellConfig};
use crate::sync::SyncGains;

use super::trajectory::{envelope, JointTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// All four joints tracking gait-like sinusoids from a matched start.
    Nominal,
    /// Nominal with an initial tracking error and extra cable slack.
    Perturbed,
    /// Single-knee sinusoid with the right leg clamped, low joint gains and a
    /// stiff follower filter.
    PaperV,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Nominal, Preset::Perturbed, Preset::PaperV];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Nominal => "nominal",
            Preset::Perturbed => "perturbed",
            Preset::PaperV => "paper_v",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Nominal => "four-joint gait-like tracking from a matched start, automatic rho, hold enforcement",
            Preset::Perturbed => "nominal with 5 deg initial tracking error and 0.1 rad follower slack",
            Preset::PaperV => "left knee 10-80 deg, 3 s period, 60 s, right leg clamped, k1 = 2, eps = 2, beta = 30",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown preset `{s}` (expected nominal, perturbed or paper_v)")))
    }
}

/// A time constant that is either derived or given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timing {
    /// Disabled.
    Off,
    /// `ln(mu) / lambda_rho`.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSettings {
    pub gains: JointGains,
    /// Derive rho from the estimated bound constants and the trajectory
    /// envelope instead of using `rho`.
    pub rho_auto: bool,
    pub rho: RhoCoeffs,
    /// Symmetric input limit; `None` leaves the input unsaturated.
    pub saturation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncSettings {
    pub gains: SyncGains,
    /// Width of the `sat(r / phi)` layer replacing `sgn(r)`; 0 keeps `sgn`.
    pub boundary_layer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellSettings {
    pub n0: f64,
    /// Average dwell time used by the certificate; `Off` is not allowed.
    pub tau_a: Timing,
    pub min_hold: Timing,
}

/// Initial conditions relative to the desired trajectory at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSettings {
    /// `q(0) - q_d(0)` per joint.
    pub q_offset: [f64; JOINTS],
    /// `qdot(0) - qdot_d(0)` per joint.
    pub qdot_offset: [f64; JOINTS],
    /// Follower angle minus lead angle at `t = 0`, per joint.
    pub slack: [f64; JOINTS],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSettings {
    pub guub: bool,
    pub sync: bool,
    pub dwell: bool,
    /// Relative tolerance of the envelope monitors.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub preset: Preset,
    pub duration: f64,
    pub step: f64,
    pub seed: u64,
    pub plant: PlantParams,
    /// Joint speed limit of the bound-estimation box (rad/s).
    pub qdot_limit: f64,
    pub motors: [MotorParams; MOTORS],
    pub motor_limits: MotorLimits,
    pub joint: JointSettings,
    pub sync: SyncSettings,
    pub dwell: DwellSettings,
    pub traj: [JointTrajectory; JOINTS],
    /// Joints held by a rigid clamp instead of being actuated.
    pub clamp: [bool; JOINTS],
    pub init: InitSettings,
    pub monitor: MonitorSettings,
    pub grid: usize,
    pub samples: usize,
}

/// Quantities fixed by a scenario before the run starts.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub bounds: BoundConstants,
    pub rho: RhoCoeffs,
    pub motors: MotorBank,
    pub dwell: DwellConfig,
    pub a_rho: f64,
    pub b_rho: f64,
}

fn deg(v: f64) -> f64 {
    v * PI / 180.0
}

impl Default for Scenario {
    fn default() -> Self {
        Self::preset(Preset::Nominal)
    }
}

impl Scenario {
    pub fn preset(preset: Preset) -> Self {
        let nominal = Self::nominal();
        match preset {
            Preset::Nominal => nominal,
            Preset::Perturbed => Self {
                preset,
                init: InitSettings {
                    q_offset: [deg(5.0), deg(-5.0), deg(-5.0), deg(5.0)],
                    qdot_offset: [0.0; JOINTS],
                    slack: [0.1, -0.1, 0.1, -0.1],
                },
                ..nominal
            },
            Preset::PaperV => Self {
                preset,
                joint: JointSettings {
                    gains: JointGains { k1: 2.0, epsilon: 2.0, alpha: 10.0 },
                    rho_auto: false,
                    rho: RhoCoeffs { rho1: 10.0, rho2: 0.0, rho3: 0.0 },
                    saturation: None,
                },
                sync: SyncSettings {
                    gains: SyncGains { k2: 0.01, k3: 0.2, k4: 0.0001, beta: 30.0 },
                    boundary_layer: 0.0,
                },
                dwell: DwellSettings { n0: 1.0, tau_a: Timing::Auto, min_hold: Timing::Off },
                traj: [
                    JointTrajectory::hold(0.0),
                    JointTrajectory { mid: deg(45.0), amp: deg(35.0), period: 3.0, phase: 0.0 },
                    JointTrajectory::hold(0.0),
                    JointTrajectory::hold(0.0),
                ],
                clamp: [false, false, true, true],
                init: InitSettings { q_offset: [0.0; JOINTS], qdot_offset: [0.0; JOINTS], slack: [0.05; JOINTS] },
                ..nominal
            },
        }
    }

    fn nominal() -> Self {
        let bank = MotorBank::default();
        Self {
            preset: Preset::Nominal,
            duration: 60.0,
            step: 1e-3,
            seed: 24301,
            plant: PlantParams::default(),
            qdot_limit: 10.0,
            motors: *bank.params(),
            motor_limits: *bank.limits(),
            joint: JointSettings {
                gains: JointGains { k1: 20.0, epsilon: 200.0, alpha: 2.0 },
                rho_auto: true,
                rho: RhoCoeffs { rho1: 0.0, rho2: 0.0, rho3: 0.0 },
                saturation: None,
            },
            sync: SyncSettings {
                gains: SyncGains { k2: 5.0, k3: 5.0, k4: 3.0, beta: 5.0 },
                boundary_layer: 1.0,
            },
            dwell: DwellSettings { n0: 1.0, tau_a: Timing::Auto, min_hold: Timing::Auto },
            traj: [
                JointTrajectory { mid: deg(20.0), amp: deg(15.0), period: 3.0, phase: 0.0 },
                JointTrajectory { mid: deg(30.0), amp: deg(20.0), period: 3.0, phase: -0.5 * PI },
                JointTrajectory { mid: deg(20.0), amp: deg(15.0), period: 3.0, phase: PI },
                JointTrajectory { mid: deg(30.0), amp: deg(20.0), period: 3.0, phase: 0.5 * PI },
            ],
            clamp: [false; JOINTS],
            init: InitSettings { q_offset: [0.0; JOINTS], qdot_offset: [0.0; JOINTS], slack: [0.05, -0.05, 0.05, -0.05] },
            monitor: MonitorSettings { guub: true, sync: true, dwell: true, tolerance: 0.02 },
            grid: 9,
            samples: 4000,
        }
    }

    pub fn ticks(&self) -> usize {
        (self.duration / self.step).round() as usize
    }

    pub fn estimation(&self) -> EstimationSettings {
        EstimationSettings { grid: self.grid, samples: self.samples, seed: self.seed, ..EstimationSettings::default() }
    }

    pub fn motor_bank(&self) -> Result<MotorBank> {
        MotorBank::new(self.motors, self.motor_limits)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("timing", &[self.duration, self.step, self.qdot_limit])?;
        if self.step <= 0.0 || self.duration < self.step {
            return Err(Error::InvalidParameter("need step > 0 and duration >= step".into()));
        }
        if self.qdot_limit < 0.0 {
            return Err(Error::InvalidParameter("qdot_limit must be nonnegative".into()));
        }
        self.plant.validate()?;
        self.motor_bank()?;
        self.joint.gains.validate()?;
        self.joint.rho.validate()?;
        if let Some(limit) = self.joint.saturation {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(Error::InvalidParameter("saturation limit must be positive".into()));
            }
        }
        self.sync.gains.validate()?;
        if !(self.sync.boundary_layer.is_finite() && self.sync.boundary_layer >= 0.0) {
            return Err(Error::InvalidParameter("boundary layer must be nonnegative".into()));
        }
        if self.dwell.tau_a == Timing::Off {
            return Err(Error::InvalidParameter("dwell.tau_a must be auto or a value".into()));
        }
        for t in [self.dwell.tau_a, self.dwell.min_hold] {
            if let Timing::Value(v) = t {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameter("dwell times must be positive".into()));
                }
            }
        }
        for (j, traj) in self.traj.iter().enumerate() {
            traj.validate()?;
            if self.clamp[j] && traj.amp != 0.0 {
                return Err(Error::InvalidParameter(format!("clamped joint {j} needs a constant trajectory")));
            }
        }
        let all_init = self.init.q_offset.iter().chain(&self.init.qdot_offset).chain(&self.init.slack);
        if all_init.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("initial conditions must be finite".into()));
        }
        if !(self.monitor.tolerance.is_finite() && self.monitor.tolerance >= 0.0) {
            return Err(Error::InvalidParameter("monitor tolerance must be nonnegative".into()));
        }
        if self.grid < 2 {
            return Err(Error::InvalidParameter("estimation grid needs at least 2 points".into()));
        }
        Ok(())
    }

    /// Estimates the bound constants and resolves every `auto` setting.
    pub fn derive(&self) -> Result<Derived> {
        self.validate()?;
        let motors = self.motor_bank()?;
        let domain = StateBox::from_stops(&self.plant, self.qdot_limit);
        let bounds = estimate_bounds(&self.plant, &self.motor_limits, &domain, &self.estimation())?;
        let rho = if self.joint.rho_auto {
            rho_coeffs_from_bounds(&bounds, &envelope(&self.traj), self.joint.gains.alpha)?
        } else {
            self.joint.rho
        };
        let (a_rho, b_rho) = rho_lyapunov_constants(bounds.c_j, bounds.c_big_j);
        let g = self.sync.gains;
        let lambda = lambda_rho(b_rho, g.beta, bounds.b_lower, g.k2);
        let mu = b_rho / a_rho;
        let min_tau = mu.ln() / lambda;
        let resolve = |t: Timing| match t {
            Timing::Off => 0.0,
            Timing::Auto => min_tau,
            Timing::Value(v) => v,
        };
        let dwell = DwellConfig {
            n0: self.dwell.n0,
            tau_a: resolve(self.dwell.tau_a),
            mu,
            lambda_rho: lambda,
            min_hold: resolve(self.dwell.min_hold),
        };
        dwell.validate()?;
        Ok(Derived { bounds, rho, motors, dwell, a_rho, b_rho })
    }
}
