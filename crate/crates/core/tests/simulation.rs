use cablesync::dynamics::{mass_matrix, DisturbanceSpec, JOINTS};
use cablesync::motor::{motor_index, MotorDisturbance};
use cablesync::sim::log::write_log;
use cablesync::sim::{run, simulate, Preset, Scenario};
use cablesync::Error;

fn short(preset: Preset, duration: f64) -> Scenario {
    Scenario { duration, ..Scenario::preset(preset) }
}

fn csv_bytes(s: &Scenario) -> Vec<u8> {
    let sim = simulate(s).unwrap();
    let mut buf = Vec::new();
    write_log(&mut buf, &sim.log).unwrap();
    buf
}

#[test]
fn same_scenario_gives_identical_logs() {
    let s = short(Preset::Perturbed, 3.0);
    assert_eq!(csv_bytes(&s), csv_bytes(&s));
    let (a, ra) = run(&s).unwrap();
    let (b, rb) = run(&s).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.to_text(), rb.to_text());
}

#[test]
fn log_has_one_row_per_tick() {
    let s = short(Preset::Nominal, 0.5);
    let sim = simulate(&s).unwrap();
    assert_eq!(sim.log.len(), s.ticks() + 1);
    assert!(sim.divergence.is_none());
    assert!((sim.log.last().unwrap().t - 0.5).abs() < 1e-12);
}

#[test]
fn stored_lyapunov_values_are_recomputable() {
    let s = short(Preset::Perturbed, 2.0);
    let sim = simulate(&s).unwrap();
    let alpha = s.joint.gains.alpha;
    let beta = s.sync.gains.beta;
    for rec in &sim.log {
        let xi = rec.qd - rec.q;
        let eta = (rec.qdot_d - rec.qdot) + alpha * xi;
        assert!((xi - rec.xi).amax() <= 1e-12 && (eta - rec.eta).amax() <= 1e-12);
        let m = mass_matrix(&rec.q, &s.plant).unwrap();
        let v = 0.5 * xi.norm_squared() + 0.5 * eta.dot(&(m * eta));
        assert!((v - rec.v).abs() <= 1e-12 * v.max(1.0), "V at t = {}", rec.t);
        for j in 0..JOINTS {
            let (fl, ex) = (2 * j, 2 * j + 1);
            let e = rec.theta[fl] - rec.theta[ex];
            let r = (rec.thetadot[fl] - rec.thetadot[ex]) + beta * e;
            let follower = motor_index(j, rec.lead[j].other());
            let v_rho = 0.5 * e * e + 0.5 * s.motors[follower].inertia * r * r;
            assert!((e - rec.e[j]).abs() <= 1e-12 && (r - rec.r[j]).abs() <= 1e-12);
            assert!((v_rho - rec.v_rho[j]).abs() <= 1e-12 * v_rho.max(1.0));
            assert_eq!(rec.sigma[motor_index(j, rec.lead[j])], 1);
            assert_eq!(rec.sigma[follower], 0);
        }
    }
}

#[test]
fn followers_start_at_configured_slack() {
    let s = Scenario::preset(Preset::Perturbed);
    let sim = simulate(&short(Preset::Perturbed, 0.01)).unwrap();
    let first = &sim.log[0];
    for j in 0..JOINTS {
        let lead = motor_index(j, first.lead[j]);
        let follower = motor_index(j, first.lead[j].other());
        assert!((first.theta[follower] - first.theta[lead] - s.init.slack[j]).abs() < 1e-12);
    }
}

#[test]
fn undisturbed_matched_start_stays_within_ultimate_bound() {
    let mut s = short(Preset::Nominal, 10.0);
    s.plant.disturbance = DisturbanceSpec::zero();
    for m in &mut s.motors {
        m.disturbance = MotorDisturbance { offset: 0.0, amplitude: 0.0, ..m.disturbance };
    }
    let (sim, report) = run(&s).unwrap();
    assert!(sim.divergence.is_none());
    assert!(report.guub.claimed);
    let bound = report.guub.ultimate_bound;
    assert!(sim.log.iter().all(|r| r.xi.norm() <= bound));
    assert!(report.guub.pass());
}

#[test]
fn weak_k3_withholds_the_sync_claim() {
    let mut s = short(Preset::Nominal, 6.0);
    s.sync.gains.k3 = 1e-3;
    let (_, report) = run(&s).unwrap();
    assert!(report.sync.joints.iter().all(|j| !j.gains.k3_pass && !j.claimed));
    // Withholding is not a failure.
    assert!(report.sync.pass());
    assert!(report.to_text().contains("sync.left_hip.verdict: withheld"));
}

#[test]
fn nominal_sync_claim_holds() {
    let (_, report) = run(&short(Preset::Nominal, 6.0)).unwrap();
    for j in &report.sync.joints {
        assert!(j.claimed && j.ok, "max violation {}", j.max_violation);
    }
}

#[test]
fn divergence_keeps_partial_log() {
    let mut s = short(Preset::Perturbed, 1.0);
    s.joint.gains.epsilon = 0.01;
    let sim = simulate(&s).unwrap();
    match &sim.divergence {
        Some(Error::Diverged { t, .. }) => {
            assert!(*t < 1.0);
            assert!(!sim.log.is_empty() && sim.log.len() < s.ticks() + 1);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn clamped_joints_do_not_move() {
    let sim = simulate(&short(Preset::PaperV, 2.0)).unwrap();
    let s = Scenario::preset(Preset::PaperV);
    for rec in &sim.log {
        for j in 0..JOINTS {
            if s.clamp[j] {
                assert_eq!(rec.q[j], sim.log[0].q[j]);
                assert_eq!(rec.qdot[j], 0.0);
                assert_eq!(rec.u[j], 0.0);
            }
        }
    }
}
