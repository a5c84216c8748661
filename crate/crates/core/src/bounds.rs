//! Numerical estimation of the structural bound constants of the leg and
//! motor models.
//!
//! Plant constants come from a dense deterministic grid plus seeded random
//! samples over a state box, widened by a safety margin. Motor constants are
//! the configured admissible intervals that every `MotorParams` is checked
//! against at construction.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    coriolis_matrix_unchecked, gravity_vector_unchecked, sym2_eigenvalues, viscoelastic_unchecked, Mat4,
    PlantParams, Vec4, JOINTS,
};
use crate::error::{Error, Result};
use crate::motor::MotorLimits;

/// Relative widening applied to every sampled extreme.
pub const SAFETY_MARGIN: f64 = 0.10;

/// Joint-angle box plus a speed limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBox {
    pub q_lo: [f64; JOINTS],
    pub q_hi: [f64; JOINTS],
    pub qdot_max: f64,
}

impl StateBox {
    pub fn from_stops(p: &PlantParams, qdot_max: f64) -> Self {
        Self {
            q_lo: p.stops.map(|s| s.0),
            q_hi: p.stops.map(|s| s.1),
            qdot_max,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = self.q_lo.iter().chain(&self.q_hi).chain([&self.qdot_max]).all(|v| v.is_finite());
        let nonempty = self.q_lo.iter().zip(&self.q_hi).all(|(lo, hi)| lo <= hi);
        if !finite || !nonempty || self.qdot_max < 0.0 {
            return Err(Error::InvalidInput("state box is empty".into()));
        }
        Ok(())
    }
}

/// Inertia eigenvalue bounds of one leg block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaBounds {
    pub c_m: f64,
    pub c_big_m: f64,
}

/// Known constants of the structural properties of both subsystems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    /// `c_m |x|^2 <= x' M x <= c_M |x|^2`.
    pub c_m: f64,
    pub c_big_m: f64,
    /// `|C(q, qdot)| <= c_c |qdot|`.
    pub c_c: f64,
    /// `|G| <= c_g`.
    pub c_g: f64,
    /// `|P| <= c_p1 + c_p2 |qdot|`.
    pub c_p1: f64,
    pub c_p2: f64,
    /// `|d(t)| <= d_exo`.
    pub d_exo: f64,
    pub c_j: f64,
    pub c_big_j: f64,
    pub c_d: f64,
    pub c_big_d: f64,
    pub c_de: f64,
    pub c_big_de: f64,
    pub b_lower: f64,
    pub b_upper: f64,
    /// Per-leg inertia bounds, left then right.
    pub legs: [InertiaBounds; 2],
}

impl BoundConstants {
    /// Largest magnitude of motor damping.
    pub fn damping_abs(&self) -> f64 {
        self.c_d.abs().max(self.c_big_d.abs())
    }

    /// Largest magnitude of the motor disturbance.
    pub fn motor_disturbance_abs(&self) -> f64 {
        self.c_de.abs().max(self.c_big_de.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationSettings {
    /// Grid points per joint axis.
    pub grid: usize,
    /// Random samples on top of the grid.
    pub samples: usize,
    /// Grid points along each knee axis for the inertia bounds.
    pub knee_grid: usize,
    pub seed: u64,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        Self { grid: 9, samples: 4000, knee_grid: 2001, seed: 0x5eed }
    }
}

pub fn estimate_bounds(
    p: &PlantParams,
    motors: &MotorLimits,
    domain: &StateBox,
    settings: &EstimationSettings,
) -> Result<BoundConstants> {
    domain.validate()?;
    p.validate()?;
    if settings.grid < 2 || settings.knee_grid < 2 {
        return Err(Error::InvalidInput("estimation grids need at least two points per axis".into()));
    }

    let legs = [0, 1].map(|leg| leg_inertia_bounds(p, domain, leg, settings.knee_grid));
    let c_m = legs[0].c_m.min(legs[1].c_m);
    let c_big_m = legs[0].c_big_m.max(legs[1].c_big_m);

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut c_c: f64 = 0.0;
    let mut c_g: f64 = 0.0;
    let mut c_p1: f64 = 0.0;
    let mut visit = |q: &Vec4, rng: &mut ChaCha8Rng| {
        c_g = c_g.max(gravity_vector_unchecked(q, p).norm());
        c_p1 = c_p1.max(viscoelastic_unchecked(q, &Vec4::zeros(), p).norm());
        if domain.qdot_max > 0.0 {
            // C is linear in qdot, so the ratio only depends on the direction.
            for j in 0..JOINTS {
                let mut e = Vec4::zeros();
                e[j] = 1.0;
                c_c = c_c.max(spectral_norm(&coriolis_matrix_unchecked(q, &e, p)));
            }
            let v = random_unit(rng);
            c_c = c_c.max(spectral_norm(&coriolis_matrix_unchecked(q, &v, p)));
        }
    };

    let n = settings.grid;
    let total = n.pow(JOINTS as u32);
    for idx in 0..total {
        let mut q = Vec4::zeros();
        let mut rem = idx;
        for j in 0..JOINTS {
            let k = rem % n;
            rem /= n;
            q[j] = domain.q_lo[j] + (domain.q_hi[j] - domain.q_lo[j]) * k as f64 / (n - 1) as f64;
        }
        visit(&q, &mut rng);
    }
    for _ in 0..settings.samples {
        let q = random_in_box(domain, &mut rng);
        visit(&q, &mut rng);
    }

    let up = 1.0 + SAFETY_MARGIN;
    let down = 1.0 - SAFETY_MARGIN;
    let damping_max = p.damping.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()));
    Ok(BoundConstants {
        c_m: c_m * down,
        c_big_m: c_big_m * up,
        c_c: c_c * up,
        c_g: c_g * up,
        c_p1: c_p1 * up,
        c_p2: damping_max * up,
        d_exo: p.disturbance.bound(),
        c_j: motors.inertia.0,
        c_big_j: motors.inertia.1,
        c_d: motors.damping.0,
        c_big_d: motors.damping.1,
        c_de: motors.disturbance.0,
        c_big_de: motors.disturbance.1,
        b_lower: motors.effectiveness.0,
        b_upper: motors.effectiveness.1,
        legs: legs.map(|l| InertiaBounds { c_m: l.c_m * down, c_big_m: l.c_big_m * up }),
    })
}

fn leg_inertia_bounds(p: &PlantParams, domain: &StateBox, leg: usize, n: usize) -> InertiaBounds {
    let knee = 2 * leg + 1;
    let (lo, hi) = (domain.q_lo[knee], domain.q_hi[knee]);
    let mut out = InertiaBounds { c_m: f64::INFINITY, c_big_m: 0.0 };
    for k in 0..n {
        let angle = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (emin, emax) = sym2_eigenvalues(&p.leg(leg).block(angle));
        out.c_m = out.c_m.min(emin);
        out.c_big_m = out.c_big_m.max(emax);
    }
    out
}

/// Induced 2-norm.
pub fn spectral_norm(m: &Mat4) -> f64 {
    let gram = m.transpose() * m;
    SymmetricEigen::new(gram).eigenvalues.max().max(0.0).sqrt()
}

pub(crate) fn random_in_box<R: Rng>(domain: &StateBox, rng: &mut R) -> Vec4 {
    Vec4::from_fn(|j, _| {
        if domain.q_hi[j] > domain.q_lo[j] {
            rng.gen_range(domain.q_lo[j]..=domain.q_hi[j])
        } else {
            domain.q_lo[j]
        }
    })
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R) -> Vec4 {
    loop {
        let v = Vec4::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}
