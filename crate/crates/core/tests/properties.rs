use std::f64::consts::PI;

use cablesync::dynamics::{coriolis_matrix, mass_matrix, mass_matrix_partials, Mat4, PlantParams, Vec4, JOINTS};
use cablesync::joint::{joint_control, JointErrors, JointGains, RhoCoeffs};
use cablesync::motor::{b_sigma, MotorBank, Role, SwitchSignals};
use cablesync::switching::{allocate, count_switches, AllocationState, DwellConfig};
use cablesync::sync::{
    control_extension, control_extension_smoothed, control_flexion, switching_term, sync_errors, SyncGains,
};
use proptest::prelude::*;

fn vec4(range: std::ops::RangeInclusive<f64>) -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(range).prop_map(Vec4::from)
}

fn posture() -> impl Strategy<Value = Vec4> {
    let p = PlantParams::default();
    let axes: [_; JOINTS] = std::array::from_fn(|j| p.stops[j].0..=p.stops[j].1);
    axes.prop_map(Vec4::from)
}

fn roles() -> impl Strategy<Value = [Role; JOINTS]> {
    prop::array::uniform4(prop::bool::ANY).prop_map(|b| b.map(|f| if f { Role::Flexion } else { Role::Extension }))
}

fn errors(xi: Vec4, eta: Vec4) -> JointErrors {
    JointErrors { xi, eta, z1_norm: (xi.norm_squared() + eta.norm_squared()).sqrt() }
}

fn no_hold() -> DwellConfig {
    DwellConfig { n0: 1.0, tau_a: 1.0, mu: 1.0, lambda_rho: 1.0, min_hold: 0.0 }
}

proptest! {
    #[test]
    fn inertia_is_symmetric_positive_definite(q in posture()) {
        let p = PlantParams::default();
        let m = mass_matrix(&q, &p).unwrap();
        prop_assert_eq!(m, m.transpose());
        prop_assert!(m.symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn mdot_minus_two_c_is_skew(q in posture(), qdot in vec4(-8.0..=8.0), x in vec4(-2.0..=2.0)) {
        let p = PlantParams::default();
        let partials = mass_matrix_partials(&q, &p);
        let mdot = (0..JOINTS).fold(Mat4::zeros(), |acc, k| acc + partials[k] * qdot[k]);
        let n = mdot - 2.0 * coriolis_matrix(&q, &qdot, &p).unwrap();
        prop_assert!((n + n.transpose()).amax() <= 1e-10);
        prop_assert!(x.dot(&(n * x)).abs() <= 1e-10 * (1.0 + x.norm_squared()));
    }

    #[test]
    fn joint_input_is_odd(xi in vec4(-1.0..=1.0), eta in vec4(-3.0..=3.0), k1 in 0.1..50.0, eps in 0.1..100.0, r1 in 0.0..50.0, r2 in 0.0..50.0, r3 in 0.0..10.0) {
        let g = JointGains { k1, epsilon: eps, alpha: 2.0 };
        let c = RhoCoeffs { rho1: r1, rho2: r2, rho3: r3 };
        let u = joint_control(&errors(xi, eta), &g, &c);
        let v = joint_control(&errors(-xi, -eta), &g, &c);
        prop_assert!((u + v).amax() <= 1e-12 * (1.0 + u.amax()));
        // The input is parallel to eta with a positive gain.
        prop_assert!(u.dot(&eta) >= 0.0);
    }

    #[test]
    fn follower_inputs_are_opposite(a in -1.0..1.0, b in -1.0..1.0, va in -5.0..5.0, vb in -5.0..5.0, phi in 0.0..2.0) {
        let g = SyncGains { k2: 0.01, k3: 0.2, k4: 1e-4, beta: 30.0 };
        let s = sync_errors(a, b, va, vb, g.beta);
        prop_assert_eq!(control_flexion(&s, &g) + control_extension(&s, &g), 0.0);
        let smooth = control_extension_smoothed(&s, &g, phi);
        prop_assert!(smooth.abs() <= control_extension(&s, &g).abs() + 1e-15);
        prop_assert!(switching_term(s.r, phi).abs() <= 1.0);
    }

    #[test]
    fn effectiveness_is_sandwiched(leads in roles(), x in vec4(-10.0..=10.0)) {
        let bank = MotorBank::default();
        let b = b_sigma(&SwitchSignals::from_leads(&leads), &bank).unwrap();
        let lim = bank.limits().effectiveness;
        let quad = x.dot(&(b * x));
        prop_assert!(quad >= lim.0 * x.norm_squared() - 1e-12);
        prop_assert!(quad <= lim.1 * x.norm_squared() + 1e-12);
        prop_assert_eq!(SwitchSignals::from_leads(&leads).leads().unwrap(), leads);
    }

    #[test]
    fn allocation_is_deterministic(us in prop::collection::vec(vec4(-1.0..=1.0), 1..60), start in roles()) {
        let replay = || {
            let mut st = AllocationState::new(start);
            for (k, u) in us.iter().enumerate() {
                st = allocate(u, st, k as f64 * 1e-3, &no_hold()).unwrap().1;
            }
            st
        };
        prop_assert_eq!(replay(), replay());
    }

    #[test]
    fn hold_spaces_switches(period in 1usize..4, hold_ticks in 2usize..10) {
        let h = 1e-3;
        let cfg = DwellConfig { min_hold: hold_ticks as f64 * h, ..no_hold() };
        let mut st = AllocationState::new([Role::Flexion; JOINTS]);
        for k in 1..=2000usize {
            let s = if (k / period) % 2 == 0 { 1.0 } else { -1.0 };
            st = allocate(&Vec4::repeat(s), st, k as f64 * h, &cfg).unwrap().1;
        }
        for j in 0..JOINTS {
            let times: Vec<f64> = st.switch_log.iter().filter(|e| e.joint == j).map(|e| e.time).collect();
            prop_assert!(!times.is_empty());
            for w in times.windows(2) {
                prop_assert!(w[1] - w[0] >= cfg.min_hold - 1e-12);
            }
        }
    }
}

#[test]
fn square_wave_at_twice_the_step_respects_hold() {
    let h = 1e-3;
    let cfg = DwellConfig { min_hold: 5.0 * h, ..no_hold() };
    let mut st = AllocationState::new([Role::Extension; JOINTS]);
    for k in 1..=1000usize {
        let s = if k % 2 == 0 { -1.0 } else { 1.0 };
        st = allocate(&Vec4::new(s, 0.0, 0.0, 0.0), st, k as f64 * h, &cfg).unwrap().1;
    }
    let times: Vec<f64> = st.switch_log.iter().map(|e| e.time).collect();
    assert!(times.len() > 100);
    assert!(times.windows(2).all(|w| w[1] - w[0] >= 5.0 * h - 1e-12));
    assert!(!st.deferrals.is_empty());
}

#[test]
fn sinusoid_reversals_over_sixty_seconds() {
    // Desired knee velocity of a 3 s sinusoid, starting at rest from the bottom of
    // the range with the extension motor leading.
    let h = 1e-3;
    let mut st = AllocationState::new([Role::Extension; JOINTS]);
    for k in 1..60_000usize {
        let t = k as f64 * h;
        let u = (2.0 * PI * t / 3.0).sin();
        st = allocate(&Vec4::new(0.0, u, 0.0, 0.0), st, t, &no_hold()).unwrap().1;
    }
    assert_eq!(count_switches(&st.switch_log, 0.0, 60.0), 40);
    let flex = st.switch_log.iter().filter(|e| e.new_lead == Role::Flexion).count();
    assert_eq!(flex, 20);
}
