//! Lead/follower allocation from the sign of the joint input, the switch
//! log, and the average dwell time certificate.

use crate::dynamics::{Vec4, JOINTS};
use crate::error::{Error, Result};
use crate::motor::{Role, SwitchSignals};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchEvent {
    pub time: f64,
    pub joint: usize,
    pub new_lead: Role,
}

/// A sign change that the hold rule refused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deferral {
    pub time: f64,
    pub joint: usize,
    pub requested: Role,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationState {
    pub leads: [Role; JOINTS],
    /// Time of the last realized switch per joint, `-inf` before the first.
    pub last_switch_time: [f64; JOINTS],
    pub switch_log: Vec<SwitchEvent>,
    pub deferrals: Vec<Deferral>,
    last_time: Option<f64>,
}

impl AllocationState {
    pub fn new(leads: [Role; JOINTS]) -> Self {
        Self {
            leads,
            last_switch_time: [f64::NEG_INFINITY; JOINTS],
            switch_log: Vec::new(),
            deferrals: Vec::new(),
            last_time: None,
        }
    }

    /// Leads implied by the sign of an initial input; zero picks flexion.
    pub fn from_input(u: &Vec4) -> Self {
        Self::new(std::array::from_fn(|j| if u[j] < 0.0 { Role::Extension } else { Role::Flexion }))
    }

    pub fn signals(&self) -> SwitchSignals {
        SwitchSignals::from_leads(&self.leads)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellConfig {
    /// Chatter bound.
    pub n0: f64,
    /// Average dwell time (s).
    pub tau_a: f64,
    /// `b_rho / a_rho`.
    pub mu: f64,
    /// Exponential rate of the un-switched follower error (1/s).
    pub lambda_rho: f64,
    /// Enforced hold time between role changes of one joint (s); 0 disables.
    pub min_hold: f64,
}

impl DwellConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.n0, self.tau_a, self.mu, self.lambda_rho, self.min_hold];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("dwell configuration must be finite".into()));
        }
        if self.n0 < 1.0 {
            return Err(Error::InvalidParameter("N0 must be at least 1".into()));
        }
        if self.tau_a <= 0.0 || self.lambda_rho <= 0.0 {
            return Err(Error::InvalidParameter("tau_a and lambda_rho must be positive".into()));
        }
        if self.mu < 1.0 {
            return Err(Error::InvalidParameter("mu must be at least 1".into()));
        }
        if self.min_hold < 0.0 {
            return Err(Error::InvalidParameter("min_hold must be nonnegative".into()));
        }
        // Relative slack so that a hold set exactly to ln(mu)/lambda passes.
        if self.min_hold > 0.0 && self.min_hold < self.min_tau_a() * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "min_hold {} is below ln(mu)/lambda_rho = {}",
                self.min_hold,
                self.min_tau_a()
            )));
        }
        Ok(())
    }

    /// `ln(mu) / lambda_rho`, the smallest admissible average dwell time.
    pub fn min_tau_a(&self) -> f64 {
        self.mu.ln() / self.lambda_rho
    }
}

/// `a_rho = min(1/2, c_j/2)` and `b_rho = max(1/2, c_J/2)` for
/// `V_rho = e^2/2 + J r^2/2`.
pub fn rho_lyapunov_constants(c_j: f64, c_big_j: f64) -> (f64, f64) {
    (0.5_f64.min(0.5 * c_j), 0.5_f64.max(0.5 * c_big_j))
}

/// `lambda_rho = min(beta, B_lower k2) / b_rho`.
pub fn lambda_rho(b_rho: f64, beta: f64, b_lower: f64, k2: f64) -> f64 {
    beta.min(b_lower * k2) / b_rho
}

/// One allocation step at time `t`.
///
/// Positive input makes the flexion motor lead, negative the extension motor,
/// zero keeps the previous lead. A change requested before `min_hold` has
/// elapsed since the joint's last switch is deferred and recorded.
pub fn allocate(u: &Vec4, mut state: AllocationState, t: f64, cfg: &DwellConfig) -> Result<(SwitchSignals, AllocationState)> {
    if !t.is_finite() || u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("allocation input must be finite".into()));
    }
    if let Some(last) = state.last_time {
        if t <= last {
            return Err(Error::InvalidInput(format!("allocation time regressed from {last} to {t}")));
        }
    }
    state.last_time = Some(t);
    for j in 0..JOINTS {
        let requested = if u[j] > 0.0 {
            Role::Flexion
        } else if u[j] < 0.0 {
            Role::Extension
        } else {
            continue;
        };
        if requested == state.leads[j] {
            continue;
        }
        if cfg.min_hold > 0.0 && t - state.last_switch_time[j] < cfg.min_hold {
            state.deferrals.push(Deferral { time: t, joint: j, requested });
            continue;
        }
        state.leads[j] = requested;
        state.last_switch_time[j] = t;
        state.switch_log.push(SwitchEvent { time: t, joint: j, new_lead: requested });
    }
    Ok((state.signals(), state))
}

/// Number of realized role changes in `(t, big_t]`.
pub fn count_switches(log: &[SwitchEvent], t: f64, big_t: f64) -> usize {
    log.iter().filter(|ev| ev.time > t && ev.time <= big_t).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellVerdict {
    /// `N(T, t) <= N0 + (T - t) / tau_a` on every switch-delimited interval.
    pub count_ok: bool,
    /// `tau_a >= ln(mu) / lambda_rho`.
    pub tau_ok: bool,
    /// Smallest slack `N0 + (T - t)/tau_a - N` over all joints and intervals.
    pub margin: f64,
    pub switches: usize,
}

impl DwellVerdict {
    pub fn pass(&self) -> bool {
        self.count_ok && self.tau_ok
    }
}

/// Checks the average dwell time condition per joint pair on the events up
/// to `big_t`.
///
/// For switches `i <= k` of one joint the worst window is the one opening
/// just before `t_i` and closing at `t_k`: it contains `k - i + 1` switches
/// and has length `t_k - t_i`.
pub fn dwell_certificate(log: &[SwitchEvent], cfg: &DwellConfig, big_t: f64) -> Result<DwellVerdict> {
    cfg.validate()?;
    let mut margin = cfg.n0;
    let mut switches = 0;
    for j in 0..JOINTS {
        // slack(i, k) = N0 - 1 + t_k/tau - k + (i - t_i/tau); keep the running
        // minimum of the last bracket.
        let mut best = f64::INFINITY;
        let times = log.iter().filter(|ev| ev.joint == j && ev.time <= big_t).map(|ev| ev.time);
        for (k, tk) in times.enumerate() {
            switches += 1;
            best = best.min(k as f64 - tk / cfg.tau_a);
            let slack = cfg.n0 - 1.0 + tk / cfg.tau_a - k as f64 + best;
            margin = margin.min(slack);
        }
    }
    Ok(DwellVerdict {
        count_ok: margin >= 0.0,
        tau_ok: cfg.tau_a >= cfg.min_tau_a() * (1.0 - 1e-12),
        margin,
        switches,
    })
}

/// `V0 exp((N0 - 1) ln mu) exp((ln mu / tau_a - lambda_rho) T)`.
pub fn decay_envelope(v0: f64, n0: f64, mu: f64, lambda_rho: f64, tau_a: f64, big_t: f64) -> f64 {
    let ln_mu = mu.ln();
    v0 * ((n0 - 1.0) * ln_mu).exp() * ((ln_mu / tau_a - lambda_rho) * big_t).exp()
}
