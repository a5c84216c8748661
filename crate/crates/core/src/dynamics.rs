//! Sagittal-plane rigid-body model of the combined human and exoskeleton legs.
//!
//! Joint order is left hip, left knee, right hip, right knee. Angles are
//! measured so that `q = 0` is both legs hanging vertically and flexion is
//! positive. The knee flexes the shank backwards, so the absolute shank angle
//! is `q_hip - q_knee`.
//!
//! The trunk is supported externally, which leaves the two legs dynamically
//! independent: the inertia matrix is block diagonal with one 2x2 block per
//! leg.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::error::{ensure_finite, Error, Result};

pub type Vec4 = Vector4<f64>;
pub type Mat4 = Matrix4<f64>;

pub const JOINTS: usize = 4;
pub const JOINT_NAMES: [&str; JOINTS] = ["left_hip", "left_knee", "right_hip", "right_knee"];

/// Condition number above which the inertia matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Joint angles and velocities at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExoState {
    pub q: Vec4,
    pub qdot: Vec4,
    pub t: f64,
}

impl ExoState {
    pub fn new(q: Vec4, qdot: Vec4, t: f64) -> Result<Self> {
        ensure_finite("q", q.as_slice())?;
        ensure_finite("qdot", qdot.as_slice())?;
        ensure_finite("t", &[t])?;
        Ok(Self { q, qdot, t })
    }

    /// True when every joint angle lies inside its mechanical stop interval.
    pub fn within_stops(&self, p: &PlantParams) -> bool {
        (0..JOINTS).all(|j| self.q[j] >= p.stops[j].0 && self.q[j] <= p.stops[j].1)
    }
}

/// Mass, length, center-of-mass offset and inertia about the center of mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub mass: f64,
    pub length: f64,
    pub com: f64,
    pub inertia: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegParams {
    pub thigh: Segment,
    pub shank: Segment,
}

impl LegParams {
    /// Constant inertia coefficients `(a, b, c)` of the two-link leg.
    fn inertia_coeffs(&self) -> (f64, f64, f64) {
        let (t, s) = (self.thigh, self.shank);
        let a = t.inertia + t.mass * t.com * t.com + s.mass * t.length * t.length;
        let b = s.inertia + s.mass * s.com * s.com;
        let c = s.mass * t.length * s.com;
        (a, b, c)
    }

    fn gravity_moments(&self) -> (f64, f64) {
        let (t, s) = (self.thigh, self.shank);
        (t.mass * t.com + s.mass * t.length, s.mass * s.com)
    }

    pub fn block(&self, knee: f64) -> Matrix2<f64> {
        let (a, b, c) = self.inertia_coeffs();
        let ck = c * knee.cos();
        let off = -(b + ck);
        Matrix2::new(a + b + 2.0 * ck, off, off, b)
    }

    fn block_knee_derivative(&self, knee: f64) -> Matrix2<f64> {
        let (_, _, c) = self.inertia_coeffs();
        let sk = c * knee.sin();
        Matrix2::new(-2.0 * sk, sk, sk, 0.0)
    }
}

/// Bounded sinusoidal disturbance `d_j(t) = a_j sin(2 pi f_j t + phase_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceSpec {
    pub amplitude: [f64; JOINTS],
    pub frequency: [f64; JOINTS],
    pub phase: [f64; JOINTS],
}

impl DisturbanceSpec {
    pub fn zero() -> Self {
        Self { amplitude: [0.0; JOINTS], frequency: [0.0; JOINTS], phase: [0.0; JOINTS] }
    }

    /// Euclidean norm of the amplitudes; attained when all joints peak together.
    pub fn bound(&self) -> f64 {
        self.amplitude.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Physical constants of the leg model.
///
/// The defaults describe a 75 kg, 1.75 m adult wearing an exoskeleton. Human
/// segment values follow standard anthropometric tables (segment mass and
/// length fractions, center-of-mass ratios and radii of gyration); exoskeleton
/// frame masses of 1.2 kg per thigh and 0.9 kg per shank are lumped into the
/// segments. These are implementer-chosen values, not measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    pub left: LegParams,
    pub right: LegParams,
    /// Passive joint stiffness (N m/rad).
    pub stiffness: [f64; JOINTS],
    /// Rest posture of the passive stiffness (rad).
    pub rest: [f64; JOINTS],
    /// Angle span over which the stiffness torque saturates smoothly (rad).
    pub stiffness_span: f64,
    /// Viscous damping (N m s/rad).
    pub damping: [f64; JOINTS],
    pub disturbance: DisturbanceSpec,
    pub gravity: f64,
    /// Mechanical stop interval per joint (rad).
    pub stops: [(f64, f64); JOINTS],
}

impl Default for PlantParams {
    fn default() -> Self {
        let leg = LegParams {
            thigh: Segment { mass: 8.7, length: 0.43, com: 0.19, inertia: 0.16 },
            shank: Segment { mass: 5.5, length: 0.43, com: 0.25, inertia: 0.17 },
        };
        let deg = PI / 180.0;
        Self {
            left: leg,
            right: leg,
            stiffness: [2.0, 1.5, 2.0, 1.5],
            rest: [0.0, 0.3, 0.0, 0.3],
            stiffness_span: 0.5,
            damping: [0.5, 0.3, 0.5, 0.3],
            disturbance: DisturbanceSpec {
                amplitude: [1.0; JOINTS],
                frequency: [0.5, 0.7, 0.5, 0.7],
                phase: [0.0; JOINTS],
            },
            gravity: 9.81,
            stops: [(-30.0 * deg, 120.0 * deg), (-5.0 * deg, 130.0 * deg), (-30.0 * deg, 120.0 * deg), (-5.0 * deg, 130.0 * deg)],
        }
    }
}

impl PlantParams {
    /// Passive, undisturbed copy used for energy checks.
    pub fn conservative(&self) -> Self {
        Self {
            stiffness: [0.0; JOINTS],
            damping: [0.0; JOINTS],
            disturbance: DisturbanceSpec::zero(),
            ..*self
        }
    }

    pub fn leg(&self, index: usize) -> &LegParams {
        if index == 0 { &self.left } else { &self.right }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, leg) in [("left", &self.left), ("right", &self.right)] {
            for (seg_name, seg) in [("thigh", leg.thigh), ("shank", leg.shank)] {
                let vals = [seg.mass, seg.length, seg.com, seg.inertia];
                ensure_finite(&format!("{name} {seg_name}"), &vals)?;
                if seg.mass <= 0.0 || seg.length <= 0.0 || seg.inertia <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name} {seg_name}: mass, length and inertia must be positive"
                    )));
                }
                if seg.com < 0.0 {
                    return Err(Error::InvalidParameter(format!("{name} {seg_name}: negative com offset")));
                }
            }
        }
        ensure_finite("stiffness", &self.stiffness)?;
        ensure_finite("rest", &self.rest)?;
        ensure_finite("damping", &self.damping)?;
        ensure_finite("disturbance amplitude", &self.disturbance.amplitude)?;
        ensure_finite("disturbance frequency", &self.disturbance.frequency)?;
        ensure_finite("disturbance phase", &self.disturbance.phase)?;
        if self.disturbance.amplitude.iter().any(|a| *a < 0.0) {
            return Err(Error::InvalidParameter("disturbance amplitude must be >= 0".into()));
        }
        if self.stiffness_span.is_nan() || self.stiffness_span <= 0.0 {
            return Err(Error::InvalidParameter("stiffness span must be positive".into()));
        }
        if self.gravity.is_nan() || self.gravity < 0.0 {
            return Err(Error::InvalidParameter("gravity must be >= 0".into()));
        }
        for (j, (lo, hi)) in self.stops.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!("stop interval of joint {j} is empty")));
            }
        }
        Ok(())
    }
}

/// Combined inertia matrix `M(q)`.
pub fn mass_matrix(q: &Vec4, p: &PlantParams) -> Result<Mat4> {
    ensure_finite("q", q.as_slice())?;
    Ok(mass_matrix_unchecked(q, p))
}

pub(crate) fn mass_matrix_unchecked(q: &Vec4, p: &PlantParams) -> Mat4 {
    let mut m = Mat4::zeros();
    for leg in 0..2 {
        let block = p.leg(leg).block(q[2 * leg + 1]);
        m.fixed_view_mut::<2, 2>(2 * leg, 2 * leg).copy_from(&block);
    }
    m
}

/// Partial derivatives `dM/dq_i`, indexed by `i`.
pub fn mass_matrix_partials(q: &Vec4, p: &PlantParams) -> [Mat4; JOINTS] {
    let mut d = [Mat4::zeros(); JOINTS];
    for leg in 0..2 {
        let knee = 2 * leg + 1;
        let block = p.leg(leg).block_knee_derivative(q[knee]);
        d[knee].fixed_view_mut::<2, 2>(2 * leg, 2 * leg).copy_from(&block);
    }
    d
}

/// Centripetal-Coriolis matrix built from Christoffel symbols of the first
/// kind, so that `Mdot - 2C` is skew-symmetric.
pub fn coriolis_matrix(q: &Vec4, qdot: &Vec4, p: &PlantParams) -> Result<Mat4> {
    ensure_finite("q", q.as_slice())?;
    ensure_finite("qdot", qdot.as_slice())?;
    Ok(coriolis_matrix_unchecked(q, qdot, p))
}

pub(crate) fn coriolis_matrix_unchecked(q: &Vec4, qdot: &Vec4, p: &PlantParams) -> Mat4 {
    let dm = mass_matrix_partials(q, p);
    let mut c = Mat4::zeros();
    for k in 0..JOINTS {
        for j in 0..JOINTS {
            let mut sum = 0.0;
            for i in 0..JOINTS {
                let gamma = dm[i][(k, j)] + dm[j][(k, i)] - dm[k][(i, j)];
                sum += 0.5 * gamma * qdot[i];
            }
            c[(k, j)] = sum;
        }
    }
    c
}

/// Gravity torque `dU/dq`. Zero with both legs hanging.
pub fn gravity_vector(q: &Vec4, p: &PlantParams) -> Result<Vec4> {
    ensure_finite("q", q.as_slice())?;
    Ok(gravity_vector_unchecked(q, p))
}

pub(crate) fn gravity_vector_unchecked(q: &Vec4, p: &PlantParams) -> Vec4 {
    let mut g = Vec4::zeros();
    for leg in 0..2 {
        let (hip, knee) = (2 * leg, 2 * leg + 1);
        let (thigh_moment, shank_moment) = p.leg(leg).gravity_moments();
        let thigh = p.gravity * thigh_moment * q[hip].sin();
        let shank = p.gravity * shank_moment * (q[hip] - q[knee]).sin();
        g[hip] = thigh + shank;
        g[knee] = -shank;
    }
    g
}

/// Gravitational potential energy, zero with both legs hanging.
pub fn potential_energy(q: &Vec4, p: &PlantParams) -> f64 {
    (0..2)
        .map(|leg| {
            let (hip, knee) = (2 * leg, 2 * leg + 1);
            let (thigh_moment, shank_moment) = p.leg(leg).gravity_moments();
            p.gravity
                * (thigh_moment * (1.0 - q[hip].cos()) + shank_moment * (1.0 - (q[hip] - q[knee]).cos()))
        })
        .sum()
}

/// Kinetic plus potential energy.
pub fn total_energy(s: &ExoState, p: &PlantParams) -> f64 {
    let m = mass_matrix_unchecked(&s.q, p);
    0.5 * s.qdot.dot(&(m * s.qdot)) + potential_energy(&s.q, p)
}

/// Smoothly saturated stiffness about the rest posture plus linear damping.
pub fn viscoelastic(q: &Vec4, qdot: &Vec4, p: &PlantParams) -> Result<Vec4> {
    ensure_finite("q", q.as_slice())?;
    ensure_finite("qdot", qdot.as_slice())?;
    Ok(viscoelastic_unchecked(q, qdot, p))
}

pub(crate) fn viscoelastic_unchecked(q: &Vec4, qdot: &Vec4, p: &PlantParams) -> Vec4 {
    let span = p.stiffness_span;
    Vec4::from_fn(|j, _| {
        p.stiffness[j] * span * ((q[j] - p.rest[j]) / span).tanh() + p.damping[j] * qdot[j]
    })
}

pub fn disturbance(t: f64, p: &PlantParams) -> Vec4 {
    let d = &p.disturbance;
    Vec4::from_fn(|j, _| d.amplitude[j] * (2.0 * PI * d.frequency[j] * t + d.phase[j]).sin())
}

/// Everything on the left-hand side of the equation of motion except `M qddot`.
pub fn bias_torque(s: &ExoState, p: &PlantParams) -> Vec4 {
    coriolis_matrix_unchecked(&s.q, &s.qdot, p) * s.qdot
        + gravity_vector_unchecked(&s.q, p)
        + viscoelastic_unchecked(&s.q, &s.qdot, p)
        + disturbance(s.t, p)
}

/// Joint accelerations for all four joints free.
pub fn forward_dynamics(s: &ExoState, tau_e: &Vec4, p: &PlantParams) -> Result<Vec4> {
    forward_dynamics_locked(s, tau_e, p, [true; JOINTS])
}

/// Joint accelerations with some joints locked. Locked joints get zero
/// acceleration and the free joints are solved against the corresponding
/// sub-block of `M`.
pub fn forward_dynamics_locked(s: &ExoState, tau_e: &Vec4, p: &PlantParams, free: [bool; JOINTS]) -> Result<Vec4> {
    ensure_finite("tau_e", tau_e.as_slice())?;
    ensure_finite("state", s.q.as_slice())?;
    ensure_finite("state", s.qdot.as_slice())?;
    let rhs = tau_e - bias_torque(s, p);
    let mut qddot = Vec4::zeros();
    for leg in 0..2 {
        let (hip, knee) = (2 * leg, 2 * leg + 1);
        let block = p.leg(leg).block(s.q[knee]);
        check_condition(&block)?;
        match (free[hip], free[knee]) {
            (true, true) => {
                let sol = block
                    .cholesky()
                    .ok_or(Error::Singular { condition: f64::INFINITY })?
                    .solve(&Vector2::new(rhs[hip], rhs[knee]));
                qddot[hip] = sol[0];
                qddot[knee] = sol[1];
            }
            (true, false) => qddot[hip] = rhs[hip] / block[(0, 0)],
            (false, true) => qddot[knee] = rhs[knee] / block[(1, 1)],
            (false, false) => {}
        }
    }
    Ok(qddot)
}

/// Eigenvalues of a symmetric 2x2 block, ascending.
pub(crate) fn sym2_eigenvalues(m: &Matrix2<f64>) -> (f64, f64) {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let radius = (half_diff * half_diff + m[(0, 1)] * m[(0, 1)]).sqrt();
    (mean - radius, mean + radius)
}

fn check_condition(block: &Matrix2<f64>) -> Result<()> {
    let (lo, hi) = sym2_eigenvalues(block);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::Singular { condition });
    }
    Ok(())
}
