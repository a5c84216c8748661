//! Desired joint trajectories.

use std::f64::consts::PI;

use crate::dynamics::{Vec4, JOINTS};
use crate::error::{ensure_finite, Error, Result};
use crate::joint::TrajEnvelope;

/// `q_d(t) = mid - amp cos(2 pi t / period + phase)`; `amp = 0` holds `mid`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTrajectory {
    pub mid: f64,
    pub amp: f64,
    pub period: f64,
    pub phase: f64,
}

impl JointTrajectory {
    pub fn hold(angle: f64) -> Self {
        Self { mid: angle, amp: 0.0, period: 1.0, phase: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("trajectory", &[self.mid, self.amp, self.period, self.phase])?;
        if self.period <= 0.0 || self.amp < 0.0 {
            return Err(Error::InvalidParameter("trajectory period must be positive and amplitude nonnegative".into()));
        }
        Ok(())
    }

    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Angle, velocity and acceleration at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let w = self.omega();
        let arg = w * t + self.phase;
        let (s, c) = arg.sin_cos();
        (self.mid - self.amp * c, self.amp * w * s, self.amp * w * w * c)
    }

    pub fn speed_max(&self) -> f64 {
        self.amp * self.omega()
    }

    pub fn accel_max(&self) -> f64 {
        self.amp * self.omega() * self.omega()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Desired {
    pub q: Vec4,
    pub qdot: Vec4,
    pub qddot: Vec4,
}

pub fn desired_trajectory(trajs: &[JointTrajectory; JOINTS], t: f64) -> Desired {
    let mut d = Desired { q: Vec4::zeros(), qdot: Vec4::zeros(), qddot: Vec4::zeros() };
    for (j, traj) in trajs.iter().enumerate() {
        let (q, v, a) = traj.eval(t);
        d.q[j] = q;
        d.qdot[j] = v;
        d.qddot[j] = a;
    }
    d
}

/// Norm bounds of the desired velocity and acceleration, taking every
/// joint at its peak simultaneously.
pub fn envelope(trajs: &[JointTrajectory; JOINTS]) -> TrajEnvelope {
    TrajEnvelope {
        qdot_max: trajs.iter().map(|s| s.speed_max().powi(2)).sum::<f64>().sqrt(),
        qddot_max: trajs.iter().map(|s| s.accel_max().powi(2)).sum::<f64>().sqrt(),
    }
}
