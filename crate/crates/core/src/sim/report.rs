//! `key: value` text form of a certificate report.

use std::fmt::Write;

use crate::dynamics::JOINT_NAMES;

use super::log::fmt_f64;
use super::monitors::CertificateReport;

fn verdict(claimed: bool, pass: bool) -> &'static str {
    match (claimed, pass) {
        (false, _) => "withheld",
        (true, true) => "pass",
        (true, false) => "fail",
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), fmt_f64)
}

impl CertificateReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}: {v}");
        };
        kv("preset", self.preset.clone());
        kv("ticks", self.ticks.to_string());
        kv("t_end", fmt_f64(self.t_end));
        kv("status", if self.diverged.is_some() { "diverged" } else if self.pass() { "pass" } else { "fail" }.into());
        kv("diverged", self.diverged.clone().unwrap_or_else(|| "none".into()));

        let g = &self.guub;
        kv("guub.enabled", g.enabled.to_string());
        kv("guub.verdict", verdict(g.claimed, g.envelope_ok && g.ultimate_ok).into());
        kv("guub.rho1", fmt_f64(g.rho.rho1));
        kv("guub.rho2", fmt_f64(g.rho.rho2));
        kv("guub.rho3", fmt_f64(g.rho.rho3));
        kv("guub.rho_dominated", g.rho_dominated.to_string());
        kv("guub.rho_worst_ratio", fmt_f64(g.rho_worst_ratio));
        kv("guub.first_rho_violation", opt(g.first_rho_violation));
        kv("guub.b_lower_ok", g.b_lower_ok.to_string());
        kv("guub.saturation_free", g.saturation_free.to_string());
        kv("guub.delta", fmt_f64(g.delta));
        kv("guub.a", fmt_f64(g.a));
        kv("guub.b", fmt_f64(g.b));
        kv("guub.v0", fmt_f64(g.v0));
        kv("guub.envelope_ok", g.envelope_ok.to_string());
        kv("guub.max_violation", fmt_f64(g.max_violation));
        kv("guub.ultimate_bound", fmt_f64(g.ultimate_bound));
        kv("guub.steady_from", opt(g.steady_from));
        kv("guub.steady_xi_max", fmt_f64(g.steady_xi_max));
        kv("guub.ultimate_ok", g.ultimate_ok.to_string());

        let s = &self.sync;
        kv("sync.enabled", s.enabled.to_string());
        kv("sync.boundary_layer", fmt_f64(s.boundary_layer));
        kv("sync.a_rho", fmt_f64(s.a_rho));
        kv("sync.b_rho", fmt_f64(s.b_rho));
        kv("sync.lambda_rho", fmt_f64(s.lambda_rho));
        for (name, j) in JOINT_NAMES.iter().zip(&s.joints) {
            kv(&format!("sync.{name}.verdict"), verdict(j.claimed, j.ok).into());
            kv(&format!("sync.{name}.gain_conditions"), if j.gains.pass() { "pass" } else { "fail" }.into());
            kv(&format!("sync.{name}.c1"), fmt_f64(j.chi.c1));
            kv(&format!("sync.{name}.c2"), fmt_f64(j.chi.c2));
            kv(&format!("sync.{name}.k3_margin"), fmt_f64(j.gains.k3_margin));
            kv(&format!("sync.{name}.k4_margin"), fmt_f64(j.gains.k4_margin));
            kv(&format!("sync.{name}.lead_speed_max"), fmt_f64(j.lead_envelope.thetadot_max));
            kv(&format!("sync.{name}.lead_accel_max"), fmt_f64(j.lead_envelope.thetaddot_max));
            kv(&format!("sync.{name}.intervals"), j.intervals.to_string());
            kv(&format!("sync.{name}.checked_ticks"), j.checked_ticks.to_string());
            kv(&format!("sync.{name}.max_violation"), fmt_f64(j.max_violation));
        }

        let d = &self.dwell;
        kv("dwell.enabled", d.enabled.to_string());
        kv("dwell.verdict", verdict(d.enabled, d.verdict.pass() && d.hold_violations == 0).into());
        kv("dwell.n0", fmt_f64(d.config.n0));
        kv("dwell.tau_a", fmt_f64(d.config.tau_a));
        kv("dwell.min_tau_a", fmt_f64(d.config.min_tau_a()));
        kv("dwell.mu", fmt_f64(d.config.mu));
        kv("dwell.lambda_rho", fmt_f64(d.config.lambda_rho));
        kv("dwell.min_hold", fmt_f64(d.config.min_hold));
        kv("dwell.switches", d.verdict.switches.to_string());
        kv("dwell.count_ok", d.verdict.count_ok.to_string());
        kv("dwell.tau_ok", d.verdict.tau_ok.to_string());
        kv("dwell.margin", fmt_f64(d.verdict.margin));
        kv("dwell.deferrals", d.deferrals.to_string());
        kv("dwell.hold_violations", d.hold_violations.to_string());

        let t = &self.tracking;
        kv("tracking.xi_max", fmt_f64(t.xi_max));
        kv("tracking.e_max", fmt_f64(t.e_max));
        kv("tracking.growth_ratio", opt(t.growth_ratio));
        kv("tracking.sync_decays", t.sync_decays.to_string());
        kv("note", "initial conditions, plant and motor parameters are preset choices".into());
        out
    }
}
