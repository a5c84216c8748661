//! Line-oriented scenario configuration.
//!
//! Each non-blank line is `key = value`; `#` starts a comment. Keys are
//! dotted paths such as `sync.beta` or `motor.left_knee.flexion.inertia`.
//! An optional `preset` key picks the base scenario, every other omitted key
//! keeps the preset's value, and unknown keys are errors.

use std::collections::HashSet;
use std::path::Path;

use crate::dynamics::{Segment, JOINT_NAMES};
use crate::error::{Error, Result};
use crate::motor::{motor_index, Role};
use crate::sim::log::fmt_f64;
use crate::sim::scenario::{Preset, Scenario, Timing};

type Getter = Box<dyn Fn(&Scenario) -> String>;
type Setter = Box<dyn Fn(&mut Scenario, &str) -> std::result::Result<(), String>>;

struct Field {
    key: String,
    get: Getter,
    set: Setter,
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, found `{v}`"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, found `{v}`")),
    }
}

fn num(key: String, get: impl Fn(&Scenario) -> f64 + 'static, set: impl Fn(&mut Scenario, f64) + 'static) -> Field {
    Field {
        key,
        get: Box::new(move |s| fmt_f64(get(s))),
        set: Box::new(move |s, v| {
            set(s, parse_f64(v)?);
            Ok(())
        }),
    }
}

fn flag(key: String, get: impl Fn(&Scenario) -> bool + 'static, set: impl Fn(&mut Scenario, bool) + 'static) -> Field {
    Field {
        key,
        get: Box::new(move |s| get(s).to_string()),
        set: Box::new(move |s, v| {
            set(s, parse_bool(v)?);
            Ok(())
        }),
    }
}

fn count(key: String, get: impl Fn(&Scenario) -> u64 + 'static, set: impl Fn(&mut Scenario, u64) + 'static) -> Field {
    Field {
        key,
        get: Box::new(move |s| get(s).to_string()),
        set: Box::new(move |s, v| {
            set(s, v.parse::<u64>().map_err(|_| format!("expected a nonnegative integer, found `{v}`"))?);
            Ok(())
        }),
    }
}

fn timing(key: &str, get: fn(&Scenario) -> Timing, set: fn(&mut Scenario, Timing)) -> Field {
    Field {
        key: key.to_string(),
        get: Box::new(move |s| match get(s) {
            Timing::Off => "off".into(),
            Timing::Auto => "auto".into(),
            Timing::Value(v) => fmt_f64(v),
        }),
        set: Box::new(move |s, v| {
            let t = match v {
                "off" => Timing::Off,
                "auto" => Timing::Auto,
                other => Timing::Value(parse_f64(other)?),
            };
            set(s, t);
            Ok(())
        }),
    }
}

fn seg_mut<'a>(s: &'a mut Scenario, leg: usize, seg_name: &str) -> &'a mut Segment {
    let l = if leg == 0 { &mut s.plant.left } else { &mut s.plant.right };
    if seg_name == "thigh" { &mut l.thigh } else { &mut l.shank }
}

fn segment_fields(out: &mut Vec<Field>, leg: usize, seg_name: &'static str) {
    let side = if leg == 0 { "left" } else { "right" };
    let seg_ref = move |s: &Scenario| -> Segment {
        let l = s.plant.leg(leg);
        if seg_name == "thigh" { l.thigh } else { l.shank }
    };
    let prefix = format!("plant.{side}.{seg_name}");
    out.push(num(format!("{prefix}.mass"), move |s| seg_ref(s).mass, move |s, v| seg_mut(s, leg, seg_name).mass = v));
    out.push(num(format!("{prefix}.length"), move |s| seg_ref(s).length, move |s, v| seg_mut(s, leg, seg_name).length = v));
    out.push(num(format!("{prefix}.com"), move |s| seg_ref(s).com, move |s, v| seg_mut(s, leg, seg_name).com = v));
    out.push(num(format!("{prefix}.inertia"), move |s| seg_ref(s).inertia, move |s, v| seg_mut(s, leg, seg_name).inertia = v));
}

fn registry() -> Vec<Field> {
    let mut f = vec![
        num("sim.duration".into(), |s| s.duration, |s, v| s.duration = v),
        num("sim.step".into(), |s| s.step, |s, v| s.step = v),
        count("sim.seed".into(), |s| s.seed, |s, v| s.seed = v),
        count("sim.grid".into(), |s| s.grid as u64, |s, v| s.grid = v as usize),
        count("sim.samples".into(), |s| s.samples as u64, |s, v| s.samples = v as usize),
        num("plant.gravity".into(), |s| s.plant.gravity, |s, v| s.plant.gravity = v),
        num("plant.stiffness_span".into(), |s| s.plant.stiffness_span, |s, v| s.plant.stiffness_span = v),
        num("plant.qdot_limit".into(), |s| s.qdot_limit, |s, v| s.qdot_limit = v),
    ];
    for leg in 0..2 {
        segment_fields(&mut f, leg, "thigh");
        segment_fields(&mut f, leg, "shank");
    }
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        let p = format!("plant.{name}");
        f.push(num(format!("{p}.stiffness"), move |s| s.plant.stiffness[j], move |s, v| s.plant.stiffness[j] = v));
        f.push(num(format!("{p}.rest"), move |s| s.plant.rest[j], move |s, v| s.plant.rest[j] = v));
        f.push(num(format!("{p}.damping"), move |s| s.plant.damping[j], move |s, v| s.plant.damping[j] = v));
        f.push(num(format!("{p}.stop_lo"), move |s| s.plant.stops[j].0, move |s, v| s.plant.stops[j].0 = v));
        f.push(num(format!("{p}.stop_hi"), move |s| s.plant.stops[j].1, move |s, v| s.plant.stops[j].1 = v));
        f.push(num(
            format!("{p}.dist_amplitude"),
            move |s| s.plant.disturbance.amplitude[j],
            move |s, v| s.plant.disturbance.amplitude[j] = v,
        ));
        f.push(num(
            format!("{p}.dist_frequency"),
            move |s| s.plant.disturbance.frequency[j],
            move |s, v| s.plant.disturbance.frequency[j] = v,
        ));
        f.push(num(
            format!("{p}.dist_phase"),
            move |s| s.plant.disturbance.phase[j],
            move |s, v| s.plant.disturbance.phase[j] = v,
        ));
    }
    f.extend([
        num("motor.limits.inertia_lo".into(), |s| s.motor_limits.inertia.0, |s, v| s.motor_limits.inertia.0 = v),
        num("motor.limits.inertia_hi".into(), |s| s.motor_limits.inertia.1, |s, v| s.motor_limits.inertia.1 = v),
        num("motor.limits.damping_lo".into(), |s| s.motor_limits.damping.0, |s, v| s.motor_limits.damping.0 = v),
        num("motor.limits.damping_hi".into(), |s| s.motor_limits.damping.1, |s, v| s.motor_limits.damping.1 = v),
        num(
            "motor.limits.disturbance_lo".into(),
            |s| s.motor_limits.disturbance.0,
            |s, v| s.motor_limits.disturbance.0 = v,
        ),
        num(
            "motor.limits.disturbance_hi".into(),
            |s| s.motor_limits.disturbance.1,
            |s, v| s.motor_limits.disturbance.1 = v,
        ),
        num(
            "motor.limits.effectiveness_lo".into(),
            |s| s.motor_limits.effectiveness.0,
            |s, v| s.motor_limits.effectiveness.0 = v,
        ),
        num(
            "motor.limits.effectiveness_hi".into(),
            |s| s.motor_limits.effectiveness.1,
            |s, v| s.motor_limits.effectiveness.1 = v,
        ),
    ]);
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        for role in [Role::Flexion, Role::Extension] {
            let n = motor_index(j, role);
            let p = format!("motor.{name}.{role}");
            f.push(num(format!("{p}.inertia"), move |s| s.motors[n].inertia, move |s, v| s.motors[n].inertia = v));
            f.push(num(format!("{p}.damping"), move |s| s.motors[n].damping, move |s, v| s.motors[n].damping = v));
            f.push(num(
                format!("{p}.effectiveness"),
                move |s| s.motors[n].effectiveness,
                move |s, v| s.motors[n].effectiveness = v,
            ));
            f.push(num(format!("{p}.ratio"), move |s| s.motors[n].ratio, move |s, v| s.motors[n].ratio = v));
            f.push(num(format!("{p}.offset"), move |s| s.motors[n].offset, move |s, v| s.motors[n].offset = v));
            f.push(num(
                format!("{p}.dist_offset"),
                move |s| s.motors[n].disturbance.offset,
                move |s, v| s.motors[n].disturbance.offset = v,
            ));
            f.push(num(
                format!("{p}.dist_amplitude"),
                move |s| s.motors[n].disturbance.amplitude,
                move |s, v| s.motors[n].disturbance.amplitude = v,
            ));
            f.push(num(
                format!("{p}.dist_frequency"),
                move |s| s.motors[n].disturbance.frequency,
                move |s, v| s.motors[n].disturbance.frequency = v,
            ));
            f.push(num(
                format!("{p}.dist_phase"),
                move |s| s.motors[n].disturbance.phase,
                move |s, v| s.motors[n].disturbance.phase = v,
            ));
        }
    }
    f.extend([
        num("joint.k1".into(), |s| s.joint.gains.k1, |s, v| s.joint.gains.k1 = v),
        num("joint.epsilon".into(), |s| s.joint.gains.epsilon, |s, v| s.joint.gains.epsilon = v),
        num("joint.alpha".into(), |s| s.joint.gains.alpha, |s, v| s.joint.gains.alpha = v),
        flag("joint.rho_auto".into(), |s| s.joint.rho_auto, |s, v| s.joint.rho_auto = v),
        num("joint.rho1".into(), |s| s.joint.rho.rho1, |s, v| s.joint.rho.rho1 = v),
        num("joint.rho2".into(), |s| s.joint.rho.rho2, |s, v| s.joint.rho.rho2 = v),
        num("joint.rho3".into(), |s| s.joint.rho.rho3, |s, v| s.joint.rho.rho3 = v),
        Field {
            key: "joint.saturation".into(),
            get: Box::new(|s| s.joint.saturation.map_or_else(|| "off".into(), fmt_f64)),
            set: Box::new(|s, v| {
                s.joint.saturation = if v == "off" { None } else { Some(parse_f64(v)?) };
                Ok(())
            }),
        },
        num("sync.k2".into(), |s| s.sync.gains.k2, |s, v| s.sync.gains.k2 = v),
        num("sync.k3".into(), |s| s.sync.gains.k3, |s, v| s.sync.gains.k3 = v),
        num("sync.k4".into(), |s| s.sync.gains.k4, |s, v| s.sync.gains.k4 = v),
        num("sync.beta".into(), |s| s.sync.gains.beta, |s, v| s.sync.gains.beta = v),
        num("sync.boundary_layer".into(), |s| s.sync.boundary_layer, |s, v| s.sync.boundary_layer = v),
        num("dwell.n0".into(), |s| s.dwell.n0, |s, v| s.dwell.n0 = v),
        timing("dwell.tau_a", |s| s.dwell.tau_a, |s, v| s.dwell.tau_a = v),
        timing("dwell.min_hold", |s| s.dwell.min_hold, |s, v| s.dwell.min_hold = v),
    ]);
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        let p = format!("traj.{name}");
        f.push(num(format!("{p}.mid"), move |s| s.traj[j].mid, move |s, v| s.traj[j].mid = v));
        f.push(num(format!("{p}.amp"), move |s| s.traj[j].amp, move |s, v| s.traj[j].amp = v));
        f.push(num(format!("{p}.period"), move |s| s.traj[j].period, move |s, v| s.traj[j].period = v));
        f.push(num(format!("{p}.phase"), move |s| s.traj[j].phase, move |s, v| s.traj[j].phase = v));
        f.push(flag(format!("{p}.clamp"), move |s| s.clamp[j], move |s, v| s.clamp[j] = v));
    }
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        let p = format!("init.{name}");
        f.push(num(format!("{p}.q_offset"), move |s| s.init.q_offset[j], move |s, v| s.init.q_offset[j] = v));
        f.push(num(format!("{p}.qdot_offset"), move |s| s.init.qdot_offset[j], move |s, v| s.init.qdot_offset[j] = v));
        f.push(num(format!("{p}.slack"), move |s| s.init.slack[j], move |s, v| s.init.slack[j] = v));
    }
    f.extend([
        flag("monitor.guub".into(), |s| s.monitor.guub, |s, v| s.monitor.guub = v),
        flag("monitor.sync".into(), |s| s.monitor.sync, |s, v| s.monitor.sync = v),
        flag("monitor.dwell".into(), |s| s.monitor.dwell, |s, v| s.monitor.dwell = v),
        num("monitor.tolerance".into(), |s| s.monitor.tolerance, |s, v| s.monitor.tolerance = v),
    ]);
    f
}

/// Every accepted key except `preset`, in dump order.
pub fn keys() -> Vec<String> {
    registry().into_iter().map(|f| f.key).collect()
}

/// Parses configuration text into a validated scenario.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    let mut preset = Preset::Nominal;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config { line: line_no, message: format!("expected `key = value`, found `{line}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(Error::Config { line: line_no, message: format!("duplicate key `{key}`") });
        }
        if key == "preset" {
            preset = value.parse().map_err(|e: Error| Error::Config { line: line_no, message: e.to_string() })?;
        } else {
            entries.push((line_no, key.to_string(), value.to_string()));
        }
    }
    let mut scenario = Scenario::preset(preset);
    let fields = registry();
    for (line, key, value) in entries {
        let field = fields.iter().find(|f| f.key == key).ok_or_else(|| Error::UnknownKey(key.clone()))?;
        (field.set)(&mut scenario, &value).map_err(|message| Error::Config { line, message: format!("{key}: {message}") })?;
    }
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_config(path: &Path) -> Result<Scenario> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Full configuration text of a scenario; parsing it yields the same scenario.
pub fn dump_config(s: &Scenario) -> String {
    let mut out = format!("preset = {}\n", s.preset);
    for f in registry() {
        out.push_str(&format!("{} = {}\n", f.key, (f.get)(s)));
    }
    out
}
