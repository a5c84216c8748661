//! Sliding-mode synchronization of the follower motor to its lead.
//!
//! `e = theta_fl - theta_ex` whichever motor leads, `r = edot + beta e`.
//! The extension follower applies
//! `u_ex = k2 r + (k3 + k4 |z2|) sgn(r)` and the flexion follower its negation.

use crate::bounds::BoundConstants;
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncGains {
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub beta: f64,
}

impl SyncGains {
    pub fn new(k2: f64, k3: f64, k4: f64, beta: f64) -> Result<Self> {
        let g = Self { k2, k3, k4, beta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k2", self.k2), ("k3", self.k3), ("k4", self.k4), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("sync gain {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncErrors {
    pub e: f64,
    pub r: f64,
    pub z2_norm: f64,
}

pub fn sync_errors(theta_fl: f64, theta_ex: f64, thetadot_fl: f64, thetadot_ex: f64, beta: f64) -> SyncErrors {
    let e = theta_fl - theta_ex;
    let edot = thetadot_fl - thetadot_ex;
    let r = edot + beta * e;
    SyncErrors { e, r, z2_norm: e.hypot(r) }
}

/// `sgn` with `sgn(0) = 0`, or `sat(r / phi)` when `phi > 0`.
pub fn switching_term(r: f64, boundary_layer: f64) -> f64 {
    if boundary_layer > 0.0 {
        (r / boundary_layer).clamp(-1.0, 1.0)
    } else if r > 0.0 {
        1.0
    } else if r < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn control_extension(s: &SyncErrors, g: &SyncGains) -> f64 {
    control_extension_smoothed(s, g, 0.0)
}

pub fn control_flexion(s: &SyncErrors, g: &SyncGains) -> f64 {
    -control_extension(s, g)
}

pub fn control_extension_smoothed(s: &SyncErrors, g: &SyncGains, boundary_layer: f64) -> f64 {
    g.k2 * s.r + (g.k3 + g.k4 * s.z2_norm) * switching_term(s.r, boundary_layer)
}

/// Constants of `|chi| <= c1 + c2 |z2|` for the follower error dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiBounds {
    pub c1: f64,
    pub c2: f64,
}

/// Bounds on the lead motor's speed and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadEnvelope {
    pub thetadot_max: f64,
    pub thetaddot_max: f64,
}

/// Interval bound over the motor constants and the lead envelope.
///
/// For the extension follower
/// `chi = J (thetaddot_lead + beta edot) + D (thetadot_lead - edot) + d + e`;
/// the flexion follower has the mirrored form. With `|edot| <= s |z2|`,
/// `s = sqrt(1 + beta^2)`, and `|e| <= |z2|`:
/// `c1 = c_J A + D_abs V + d_abs` and `c2 = (c_J beta + D_abs) s + 1`.
pub fn chi_bounds_from_params(b: &BoundConstants, lead: &LeadEnvelope, beta: f64) -> Result<ChiBounds> {
    ensure_finite("lead envelope", &[lead.thetadot_max, lead.thetaddot_max, beta])?;
    if lead.thetadot_max < 0.0 || lead.thetaddot_max < 0.0 || beta <= 0.0 {
        return Err(Error::InvalidInput("lead envelope must be nonnegative and beta positive".into()));
    }
    let s = (1.0 + beta * beta).sqrt();
    let d_abs = b.damping_abs();
    Ok(ChiBounds {
        c1: b.c_big_j * lead.thetaddot_max + d_abs * lead.thetadot_max + b.motor_disturbance_abs(),
        c2: (b.c_big_j * beta + d_abs) * s + 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainVerdict {
    pub k3_pass: bool,
    pub k4_pass: bool,
    /// `k3 - c1 / B_lower`.
    pub k3_margin: f64,
    /// `k4 - c2 / B_lower`.
    pub k4_margin: f64,
}

impl GainVerdict {
    pub fn pass(&self) -> bool {
        self.k3_pass && self.k4_pass
    }
}

pub fn check_gain_conditions(g: &SyncGains, b: &ChiBounds, b_lower: f64) -> Result<GainVerdict> {
    if !(b_lower.is_finite() && b_lower > 0.0) {
        return Err(Error::InvalidParameter("B_lower must be positive".into()));
    }
    let k3_margin = g.k3 - b.c1 / b_lower;
    let k4_margin = g.k4 - b.c2 / b_lower;
    Ok(GainVerdict { k3_pass: k3_margin >= 0.0, k4_pass: k4_margin >= 0.0, k3_margin, k4_margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knee_trial_gains() -> SyncGains {
        SyncGains::new(0.01, 0.2, 0.0001, 30.0).unwrap()
    }

    #[test]
    fn synchronized_pair_has_zero_error() {
        let s = sync_errors(0.4, 0.4, 1.0, 1.0, 30.0);
        assert_eq!((s.e, s.r, s.z2_norm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn filtered_sync_error() {
        let s = sync_errors(0.02, 0.0, 0.0, 0.0, 30.0);
        assert!((s.r - 0.6).abs() < 1e-15);
    }

    #[test]
    fn swapping_motors_negates_errors() {
        let a = sync_errors(0.3, 0.1, 0.2, -0.4, 5.0);
        let b = sync_errors(0.1, 0.3, -0.4, 0.2, 5.0);
        assert_eq!(a.e, -b.e);
        assert_eq!(a.r, -b.r);
    }

    #[test]
    fn zero_r_gives_zero_input() {
        let s = SyncErrors { e: 0.1, r: 0.0, z2_norm: 0.1 };
        assert_eq!(control_extension(&s, &knee_trial_gains()), 0.0);
        assert_eq!(control_flexion(&s, &knee_trial_gains()), 0.0);
    }

    #[test]
    fn flexion_is_negated_extension() {
        let g = SyncGains::new(1.5, 0.3, 0.7, 4.0).unwrap();
        for (e, r) in [(0.1, -0.2), (-0.3, 0.05), (0.0, 1.0)] {
            let s = SyncErrors { e, r, z2_norm: f64::hypot(e, r) };
            assert_eq!(control_flexion(&s, &g) + control_extension(&s, &g), 0.0);
        }
    }

    #[test]
    fn boundary_layer_is_linear_inside() {
        assert_eq!(switching_term(0.05, 0.1), 0.5);
        assert_eq!(switching_term(-3.0, 0.1), -1.0);
        assert_eq!(switching_term(-3.0, 0.0), -1.0);
    }

    #[test]
    fn gain_conditions_margins() {
        let g = SyncGains::new(1.0, 0.2, 1.0, 1.0).unwrap();
        let v = check_gain_conditions(&g, &ChiBounds { c1: 0.0, c2: 0.0 }, 2.0).unwrap();
        assert!(v.pass());
        let v = check_gain_conditions(&g, &ChiBounds { c1: 0.5, c2: 0.0 }, 2.0).unwrap();
        assert!(!v.k3_pass);
        assert!((v.k3_margin + 0.05).abs() < 1e-15);
        assert!(check_gain_conditions(&g, &ChiBounds { c1: 0.0, c2: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn invalid_gains_rejected() {
        assert!(SyncGains::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(SyncGains::new(1.0, 1.0, 1.0, -2.0).is_err());
    }
}
