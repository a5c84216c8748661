//! Sampling and numerical oracles against the model and the constructed
//! bound constants.

use cablesync::bounds::{estimate_bounds, EstimationSettings, StateBox};
use cablesync::dynamics::{
    bias_torque, forward_dynamics, mass_matrix, total_energy, ExoState, PlantParams, Vec4, JOINTS,
};
use cablesync::joint::{joint_errors, lumped_uncertainty, rho, rho_coeffs_from_bounds};
use cablesync::motor::{motor_accel, MotorDisturbance, MotorLimits, MotorParams, MotorState, Role};
use cablesync::sim::integrator::simulate_plant;
use cablesync::sim::trajectory::{desired_trajectory, envelope};
use cablesync::sim::{Preset, Scenario};
use cablesync::sync::{chi_bounds_from_params, sync_errors, LeadEnvelope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(p: &PlantParams, qdot_max: f64, rng: &mut ChaCha8Rng) -> ExoState {
    let q = Vec4::from_fn(|j, _| rng.gen_range(p.stops[j].0..=p.stops[j].1));
    let dir = Vec4::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
    let qdot = dir.normalize() * rng.gen_range(0.0..=qdot_max);
    ExoState { q, qdot, t: rng.gen_range(0.0..60.0) }
}

#[test]
fn forward_dynamics_satisfies_equation_of_motion() {
    let p = PlantParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let s = random_state(&p, 8.0, &mut rng);
        let tau = Vec4::from_fn(|_, _| rng.gen_range(-50.0..50.0));
        let qddot = forward_dynamics(&s, &tau, &p).unwrap();
        let residual = mass_matrix(&s.q, &p).unwrap() * qddot + bias_torque(&s, &p) - tau;
        assert!(residual.amax() <= 1e-10 * (1.0 + tau.amax()), "residual {residual}");
    }
}

#[test]
fn rho_dominates_sampled_uncertainty() {
    let s = Scenario::preset(Preset::PaperV);
    let b = estimate_bounds(
        &s.plant,
        &s.motor_limits,
        &StateBox::from_stops(&s.plant, s.qdot_limit),
        &s.estimation(),
    )
    .unwrap();
    let alpha = s.joint.gains.alpha;
    let coeffs = rho_coeffs_from_bounds(&b, &envelope(&s.traj), alpha).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let x = random_state(&s.plant, s.qdot_limit, &mut rng);
        let d = desired_trajectory(&s.traj, x.t);
        let errs = joint_errors(&x.q, &x.qdot, &d.q, &d.qdot, alpha).unwrap();
        let chi = lumped_uncertainty(&x, &d.q, &d.qdot, &d.qddot, alpha, &s.plant);
        worst = worst.max((chi + errs.xi).norm() / rho(errs.z1_norm, &coeffs));
    }
    assert!(worst <= 1.0, "worst ratio {worst}");
}

fn random_motor(limits: &MotorLimits, rng: &mut ChaCha8Rng) -> MotorParams {
    let pick = |(lo, hi): (f64, f64), rng: &mut ChaCha8Rng| if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    let (dlo, dhi) = limits.disturbance;
    let offset = 0.5 * (dlo + dhi);
    MotorParams {
        inertia: pick(limits.inertia, rng),
        damping: pick(limits.damping, rng),
        disturbance: MotorDisturbance {
            offset,
            amplitude: rng.gen_range(0.0..=0.5 * (dhi - dlo)),
            frequency: rng.gen_range(0.0..2.0),
            phase: rng.gen_range(0.0..6.3),
        },
        effectiveness: pick(limits.effectiveness, rng),
        role: Role::Extension,
        joint: 0,
        ratio: 1.0,
        offset: 0.0,
    }
}

#[test]
fn sync_bounds_dominate_sampled_uncertainty() {
    let s = Scenario::default();
    let d = s.derive().unwrap();
    let beta = s.sync.gains.beta;
    let lead = LeadEnvelope { thetadot_max: 3.0, thetaddot_max: 12.0 };
    let chi_b = chi_bounds_from_params(&d.bounds, &lead, beta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let follower = random_motor(&s.motor_limits, &mut rng);
        let t = rng.gen_range(0.0..60.0);
        let (lead_v, lead_a) = (rng.gen_range(-3.0..=3.0), rng.gen_range(-12.0..=12.0));
        let (e, edot) = (rng.gen_range(-0.5..=0.5), rng.gen_range(-5.0..=5.0));
        // Flexion motor leads; the extension follower sits at lead - e.
        let m = MotorState { theta: -e, thetadot: lead_v - edot };
        let free_accel = motor_accel(&m, &follower, 0.0, 1, t);
        let j = follower.inertia;
        let chi = j * (lead_a - free_accel) + j * beta * edot + e;
        let z2 = sync_errors(0.0, -e, lead_v, lead_v - edot, beta).z2_norm;
        worst = worst.max(chi.abs() / (chi_b.c1 + chi_b.c2 * z2));
    }
    assert!(worst <= 1.0, "worst ratio {worst}");
}

#[test]
fn conservative_energy_is_preserved() {
    let p = PlantParams::default().conservative();
    let s0 = ExoState { q: Vec4::new(0.6, 0.4, -0.2, 0.9), qdot: Vec4::new(0.5, -1.0, 0.8, 0.0), t: 0.0 };
    let e0 = total_energy(&s0, &p);
    let s = simulate_plant(&s0, &Vec4::zeros(), &p, 1e-3, 10_000).unwrap();
    let drift = (total_energy(&s, &p) - e0).abs() / e0.abs();
    assert!(drift <= 1e-6, "relative drift {drift}");
}

/// Global error at `t_end` for step `h` against a fine reference.
fn global_error(h: f64, reference: &ExoState, s0: &ExoState, p: &PlantParams, t_end: f64) -> f64 {
    let s = simulate_plant(s0, &Vec4::zeros(), p, h, (t_end / h).round() as usize).unwrap();
    ((s.q - reference.q).norm_squared() + (s.qdot - reference.qdot).norm_squared()).sqrt()
}

#[test]
fn integrator_is_fourth_order() {
    let p = PlantParams::default().conservative();
    let s0 = ExoState { q: Vec4::new(0.8, 0.3, 0.4, 1.0), qdot: Vec4::zeros(), t: 0.0 };
    let (h, t_end) = (0.01, 2.0);
    let reference = simulate_plant(&s0, &Vec4::zeros(), &p, h / 64.0, (64.0 * t_end / h).round() as usize).unwrap();
    let ratio = global_error(h, &reference, &s0, &p, t_end) / global_error(h / 2.0, &reference, &s0, &p, t_end);
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn hanging_rest_with_balancing_torque_stays_put() {
    let p = PlantParams::default();
    let s = ExoState { q: Vec4::zeros(), qdot: Vec4::zeros(), t: 1.3 };
    let tau = bias_torque(&s, &p);
    assert!(forward_dynamics(&s, &tau, &p).unwrap().amax() < 1e-12);
}

#[test]
fn bounds_hold_on_independent_samples() {
    let p = PlantParams::default();
    let limits = MotorLimits::default();
    let domain = StateBox::from_stops(&p, 10.0);
    let b = estimate_bounds(&p, &limits, &domain, &EstimationSettings::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..2000 {
        let s = random_state(&p, 10.0, &mut rng);
        let eig = mass_matrix(&s.q, &p).unwrap().symmetric_eigen().eigenvalues;
        assert!(eig.min() >= b.c_m && eig.max() <= b.c_big_m);
        assert!(cablesync::dynamics::gravity_vector(&s.q, &p).unwrap().norm() <= b.c_g);
    }
    assert!(b.b_lower <= limits.effectiveness.0 && b.b_upper >= limits.effectiveness.1);
    assert_eq!(JOINTS, 4);
}
