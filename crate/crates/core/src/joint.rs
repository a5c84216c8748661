//! Joint-layer robust tracking control.
//!
//! `xi = q_d - q`, `eta = xidot + alpha xi`, and the input
//! `u = k1 eta + rho(|z1|)^2 eta / epsilon` with `z1 = [xi; eta]`.

use crate::bounds::BoundConstants;
use crate::dynamics::{
    coriolis_matrix_unchecked, disturbance, gravity_vector_unchecked, mass_matrix_unchecked, viscoelastic_unchecked,
    ExoState, PlantParams, Vec4,
};
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointGains {
    pub k1: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

impl JointGains {
    pub fn new(k1: f64, epsilon: f64, alpha: f64) -> Result<Self> {
        let g = Self { k1, epsilon, alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k1", self.k1), ("epsilon", self.epsilon), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("joint gain {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Coefficients of `rho(s) = rho1 + rho2 s + rho3 s^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoCoeffs {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl RhoCoeffs {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Result<Self> {
        let c = Self { rho1, rho2, rho3 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.rho1, self.rho2, self.rho3] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("rho coefficients must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointErrors {
    pub xi: Vec4,
    pub eta: Vec4,
    pub z1_norm: f64,
}

pub fn joint_errors(q: &Vec4, qdot: &Vec4, qd: &Vec4, qdot_d: &Vec4, alpha: f64) -> Result<JointErrors> {
    ensure_finite("joint state", q.as_slice())?;
    ensure_finite("joint velocity", qdot.as_slice())?;
    ensure_finite("desired trajectory", qd.as_slice())?;
    ensure_finite("desired velocity", qdot_d.as_slice())?;
    let xi = qd - q;
    let xidot = qdot_d - qdot;
    let eta = xidot + alpha * xi;
    let z1_norm = (xi.norm_squared() + eta.norm_squared()).sqrt();
    Ok(JointErrors { xi, eta, z1_norm })
}

pub fn rho(z1_norm: f64, c: &RhoCoeffs) -> f64 {
    c.rho1 + c.rho2 * z1_norm + c.rho3 * z1_norm * z1_norm
}

pub fn joint_control(e: &JointErrors, g: &JointGains, c: &RhoCoeffs) -> Vec4 {
    let r = rho(e.z1_norm, c);
    (g.k1 + r * r / g.epsilon) * e.eta
}

/// Elementwise clamp to `[-limit, limit]`; the flag reports whether any
/// entry was clipped.
pub fn saturate(u: &Vec4, limit: f64) -> (Vec4, bool) {
    let clipped = u.map(|v| v.clamp(-limit, limit));
    let active = clipped != *u;
    (clipped, active)
}

/// Bounds on the desired trajectory: `|qdot_d| <= qdot_max`,
/// `|qddot_d| <= qddot_max` (Euclidean norms over the four joints).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajEnvelope {
    pub qdot_max: f64,
    pub qddot_max: f64,
}

/// The lumped uncertainty
/// `chi = M (qddot_d + alpha xidot) + C(q, qdot)(qdot_d + alpha xi) + G + P + d`
/// that the robust term has to dominate.
pub fn lumped_uncertainty(s: &ExoState, qd: &Vec4, qdot_d: &Vec4, qddot_d: &Vec4, alpha: f64, p: &PlantParams) -> Vec4 {
    let xi = qd - s.q;
    let xidot = qdot_d - s.qdot;
    mass_matrix_unchecked(&s.q, p) * (qddot_d + alpha * xidot)
        + coriolis_matrix_unchecked(&s.q, &s.qdot, p) * (qdot_d + alpha * xi)
        + gravity_vector_unchecked(&s.q, p)
        + viscoelastic_unchecked(&s.q, &s.qdot, p)
        + disturbance(s.t, p)
}

/// Conservative coefficients with `rho(|z1|) >= |chi + xi|`.
///
/// With `|xi|, |eta| <= |z1|` and `|xidot| <= s |z1|`, `s = sqrt(1 + alpha^2)`:
/// the inertia term contributes `c_M (Qdd + alpha s z)`, the Coriolis term
/// `c_c (Qd + s z)(Qd + alpha z)`, the viscoelastic term
/// `c_p1 + c_p2 (Qd + s z)`, and `xi` itself adds `z`.
pub fn rho_coeffs_from_bounds(b: &BoundConstants, env: &TrajEnvelope, alpha: f64) -> Result<RhoCoeffs> {
    ensure_finite("trajectory envelope", &[env.qdot_max, env.qddot_max, alpha])?;
    if env.qdot_max < 0.0 || env.qddot_max < 0.0 || alpha <= 0.0 {
        return Err(Error::InvalidInput("trajectory envelope must be nonnegative and alpha positive".into()));
    }
    let s = (1.0 + alpha * alpha).sqrt();
    let (qd, qdd) = (env.qdot_max, env.qddot_max);
    RhoCoeffs::new(
        b.c_big_m * qdd + b.c_c * qd * qd + b.c_g + b.c_p1 + b.c_p2 * qd + b.d_exo,
        b.c_big_m * alpha * s + b.c_c * (alpha + s) * qd + b.c_p2 * s + 1.0,
        b.c_c * alpha * s,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors_from(xi: Vec4, eta: Vec4) -> JointErrors {
        JointErrors { xi, eta, z1_norm: (xi.norm_squared() + eta.norm_squared()).sqrt() }
    }

    #[test]
    fn perfect_tracking_has_zero_error() {
        let q = Vec4::new(0.1, 0.2, -0.1, 0.4);
        let v = Vec4::new(1.0, -1.0, 0.5, 0.0);
        let e = joint_errors(&q, &v, &q, &v, 10.0).unwrap();
        assert_eq!(e.xi, Vec4::zeros());
        assert_eq!(e.eta, Vec4::zeros());
        assert_eq!(e.z1_norm, 0.0);
    }

    #[test]
    fn filtered_error_value() {
        let z = Vec4::zeros();
        let e = joint_errors(&z, &z, &Vec4::new(0.1, 0.0, 0.0, 0.0), &z, 10.0).unwrap();
        assert!((e.eta[0] - 1.0).abs() < 1e-15);
        assert!((e.z1_norm.powi(2) - e.xi.norm_squared() - e.eta.norm_squared()).abs() < 1e-15);
    }

    #[test]
    fn rho_polynomial() {
        let c = RhoCoeffs::new(1.0, 2.0, 0.5).unwrap();
        assert_eq!(rho(0.0, &c), 1.0);
        assert_eq!(rho(2.0, &c), 7.0);
    }

    #[test]
    fn control_law_value() {
        let g = JointGains::new(2.0, 2.0, 10.0).unwrap();
        let c = RhoCoeffs::new(1.0, 0.0, 0.0).unwrap();
        let u = joint_control(&errors_from(Vec4::zeros(), Vec4::new(1.0, 0.0, 0.0, 0.0)), &g, &c);
        assert_eq!(u, Vec4::new(2.5, 0.0, 0.0, 0.0));
        assert_eq!(joint_control(&errors_from(Vec4::new(0.3, 0.0, 0.0, 0.0), Vec4::zeros()), &g, &c), Vec4::zeros());
    }

    #[test]
    fn invalid_gains_rejected() {
        assert!(JointGains::new(0.0, 1.0, 1.0).is_err());
        assert!(JointGains::new(1.0, -1.0, 1.0).is_err());
        assert!(JointGains::new(1.0, 1.0, f64::NAN).is_err());
        assert!(RhoCoeffs::new(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn saturation_flag() {
        let (u, active) = saturate(&Vec4::new(1.0, -3.0, 0.5, 0.0), 2.0);
        assert!(active);
        assert_eq!(u, Vec4::new(1.0, -2.0, 0.5, 0.0));
        assert!(!saturate(&Vec4::new(1.0, 0.0, 0.0, 0.0), 2.0).1);
    }

    fn zero_bounds() -> BoundConstants {
        let legs = [crate::bounds::InertiaBounds { c_m: 1.0, c_big_m: 1.0 }; 2];
        BoundConstants {
            c_m: 1.0,
            c_big_m: 1.0,
            c_c: 0.0,
            c_g: 0.0,
            c_p1: 0.0,
            c_p2: 0.0,
            d_exo: 0.0,
            c_j: 0.01,
            c_big_j: 0.02,
            c_d: 0.0,
            c_big_d: 0.0,
            c_de: 0.0,
            c_big_de: 0.0,
            b_lower: 1.0,
            b_upper: 1.0,
            legs,
        }
    }

    #[test]
    fn degenerate_envelope_gives_zero_rho1() {
        let env = TrajEnvelope { qdot_max: 0.0, qddot_max: 0.0 };
        let c = rho_coeffs_from_bounds(&zero_bounds(), &env, 10.0).unwrap();
        assert_eq!(c.rho1, 0.0);
        assert_eq!(c.rho3, 0.0);
    }

    #[test]
    fn disturbance_bound_shifts_rho1_additively() {
        let env = TrajEnvelope { qdot_max: 1.2, qddot_max: 3.4 };
        let mut b = zero_bounds();
        b.c_c = 0.7;
        b.c_g = 40.0;
        let base = rho_coeffs_from_bounds(&b, &env, 5.0).unwrap();
        b.d_exo += 1.5;
        let shifted = rho_coeffs_from_bounds(&b, &env, 5.0).unwrap();
        assert!((shifted.rho1 - base.rho1 - 1.5).abs() < 1e-12);
        assert_eq!(shifted.rho2, base.rho2);
    }
}
