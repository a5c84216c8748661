//! Per-tick records and their CSV form.
//!
//! Floats are written in shortest round-trip form, so a log read back
//! reproduces every value bit for bit.

use std::io::{Read, Write};

use crate::dynamics::{Vec4, JOINTS, JOINT_NAMES};
use crate::error::{Error, Result};
use crate::motor::{Role, MOTORS};
use crate::switching::SwitchEvent;

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub q: Vec4,
    pub qdot: Vec4,
    /// Joint acceleration produced by the input held over the following step.
    pub qddot: Vec4,
    pub qd: Vec4,
    pub qdot_d: Vec4,
    pub qddot_d: Vec4,
    /// Joint input after saturation.
    pub u: Vec4,
    pub saturated: bool,
    pub theta: [f64; MOTORS],
    pub thetadot: [f64; MOTORS],
    pub u_n: [f64; MOTORS],
    pub sigma: [u8; MOTORS],
    pub xi: Vec4,
    pub eta: Vec4,
    pub e: [f64; JOINTS],
    pub r: [f64; JOINTS],
    pub v: f64,
    pub v_rho: [f64; JOINTS],
    pub lead: [Role; JOINTS],
}

fn motor_suffix(n: usize) -> String {
    n.to_string()
}

pub fn header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for prefix in ["q", "qdot", "qddot", "qd", "qdot_d", "qddot_d", "u"] {
        h.extend(JOINT_NAMES.iter().map(|j| format!("{prefix}_{j}")));
    }
    h.push("saturated".into());
    for prefix in ["theta", "thetadot", "u_n", "sigma"] {
        h.extend((0..MOTORS).map(|n| format!("{prefix}_{}", motor_suffix(n))));
    }
    for prefix in ["xi", "eta", "e", "r"] {
        h.extend(JOINT_NAMES.iter().map(|j| format!("{prefix}_{j}")));
    }
    h.push("V".into());
    h.extend(JOINT_NAMES.iter().map(|j| format!("V_rho_{j}")));
    h.extend(JOINT_NAMES.iter().map(|j| format!("lead_{j}")));
    h
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl TickRecord {
    fn fields(&self) -> Vec<String> {
        let mut f = vec![fmt_f64(self.t)];
        for v in [&self.q, &self.qdot, &self.qddot, &self.qd, &self.qdot_d, &self.qddot_d, &self.u] {
            f.extend(v.iter().map(|x| fmt_f64(*x)));
        }
        f.push(u8::from(self.saturated).to_string());
        for arr in [&self.theta, &self.thetadot, &self.u_n] {
            f.extend(arr.iter().map(|x| fmt_f64(*x)));
        }
        f.extend(self.sigma.iter().map(|s| s.to_string()));
        for v in [&self.xi, &self.eta] {
            f.extend(v.iter().map(|x| fmt_f64(*x)));
        }
        for arr in [&self.e, &self.r] {
            f.extend(arr.iter().map(|x| fmt_f64(*x)));
        }
        f.push(fmt_f64(self.v));
        f.extend(self.v_rho.iter().map(|x| fmt_f64(*x)));
        f.extend(self.lead.iter().map(|r| r.as_str().to_string()));
        f
    }

    fn parse(row: &csv::StringRecord, line: usize) -> Result<Self> {
        let expected = header().len();
        if row.len() != expected {
            return Err(Error::Log(format!("row {line}: expected {expected} fields, found {}", row.len())));
        }
        let mut it = row.iter();
        let mut next = || it.next().unwrap_or_default();
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Log(format!("row {line}: bad number `{s}`")))
        };
        let t = num(next())?;
        let mut vecs = [Vec4::zeros(); 7];
        for v in vecs.iter_mut() {
            for j in 0..JOINTS {
                v[j] = num(next())?;
            }
        }
        let saturated = match next() {
            "0" => false,
            "1" => true,
            other => return Err(Error::Log(format!("row {line}: bad saturation flag `{other}`"))),
        };
        let mut motor = [[0.0; MOTORS]; 3];
        for arr in motor.iter_mut() {
            for x in arr.iter_mut() {
                *x = num(next())?;
            }
        }
        let mut sigma = [0u8; MOTORS];
        for s in sigma.iter_mut() {
            *s = match next() {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Log(format!("row {line}: bad sigma `{other}`"))),
            };
        }
        let mut errs = [Vec4::zeros(); 2];
        for v in errs.iter_mut() {
            for j in 0..JOINTS {
                v[j] = num(next())?;
            }
        }
        let mut pair = [[0.0; JOINTS]; 2];
        for arr in pair.iter_mut() {
            for x in arr.iter_mut() {
                *x = num(next())?;
            }
        }
        let v = num(next())?;
        let mut v_rho = [0.0; JOINTS];
        for x in v_rho.iter_mut() {
            *x = num(next())?;
        }
        let mut lead = [Role::Flexion; JOINTS];
        for l in lead.iter_mut() {
            *l = next().parse().map_err(|_| Error::Log(format!("row {line}: bad lead role")))?;
        }
        let [q, qdot, qddot, qd, qdot_d, qddot_d, u] = vecs;
        let [theta, thetadot, u_n] = motor;
        let [xi, eta] = errs;
        let [e, r] = pair;
        Ok(Self { t, q, qdot, qddot, qd, qdot_d, qddot_d, u, saturated, theta, thetadot, u_n, sigma, xi, eta, e, r, v, v_rho, lead })
    }
}

pub fn write_log<W: Write>(w: W, log: &[TickRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header())?;
    for rec in log {
        out.write_record(rec.fields())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_log<R: Read>(r: R) -> Result<Vec<TickRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != header() {
        return Err(Error::Log("header does not match the tick record layout".into()));
    }
    let mut log = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        log.push(TickRecord::parse(&row?, i + 2)?);
    }
    Ok(log)
}

pub fn write_switches<W: Write>(w: W, events: &[SwitchEvent]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time", "joint", "new_lead"])?;
    for ev in events {
        out.write_record([fmt_f64(ev.time), JOINT_NAMES[ev.joint].to_string(), ev.new_lead.as_str().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Role changes implied by consecutive lead columns.
pub fn switches_from_log(log: &[TickRecord]) -> Vec<SwitchEvent> {
    let mut events = Vec::new();
    for pair in log.windows(2) {
        for j in 0..JOINTS {
            if pair[1].lead[j] != pair[0].lead[j] {
                events.push(SwitchEvent { time: pair[1].t, joint: j, new_lead: pair[1].lead[j] });
            }
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> TickRecord {
        let v = Vec4::new(0.1, -2.5e-7, 3.0, 1.0 / 3.0);
        TickRecord {
            t,
            q: v,
            qdot: v * 2.0,
            qddot: v * -1.0,
            qd: v,
            qdot_d: v,
            qddot_d: v,
            u: v * 7.0,
            saturated: false,
            theta: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 1e-300],
            thetadot: [0.0; MOTORS],
            u_n: [1.5; MOTORS],
            sigma: [1, 0, 0, 1, 1, 0, 0, 1],
            xi: v,
            eta: v,
            e: [0.01, 0.0, -0.02, 1e20],
            r: [0.0; JOINTS],
            v: 0.25,
            v_rho: [0.0; JOINTS],
            lead: [Role::Flexion, Role::Extension, Role::Flexion, Role::Extension],
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let log = vec![sample(0.0), sample(0.001)];
        let mut buf = Vec::new();
        write_log(&mut buf, &log).unwrap();
        assert_eq!(read_log(buf.as_slice()).unwrap(), log);
    }

    #[test]
    fn header_matches_row_width() {
        assert_eq!(header().len(), sample(0.0).fields().len());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 0.1, 1e-7, -3.3e-12, 123456.789, 5e300, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn switches_derived_from_lead_columns() {
        let a = sample(0.0);
        let mut b = sample(0.001);
        b.lead[1] = Role::Flexion;
        let ev = switches_from_log(&[a, b]);
        assert_eq!(ev, vec![SwitchEvent { time: 0.001, joint: 1, new_lead: Role::Flexion }]);
    }

    #[test]
    fn malformed_logs_rejected() {
        assert!(read_log("t,q\n0,1\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_log(&mut buf, &[sample(0.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("flexion", "sideways");
        assert!(read_log(text.as_bytes()).is_err());
    }
}
