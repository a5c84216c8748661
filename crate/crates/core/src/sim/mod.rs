//! Scenario execution and log monitoring.

pub mod engine;
pub mod integrator;
pub mod log;
pub mod monitors;
mod report;
pub mod scenario;
pub mod trajectory;

pub use engine::{simulate, Simulation};
pub use log::TickRecord;
pub use monitors::{certify, CertificateReport};
pub use scenario::{Preset, Scenario};

use crate::error::Result;

/// Runs a scenario and evaluates every monitor on the produced log.
pub fn run(scenario: &Scenario) -> Result<(Simulation, CertificateReport)> {
    let sim = simulate(scenario)?;
    let report = certify(
        &sim.log,
        &sim.switches,
        sim.deferrals.len(),
        sim.divergence.as_ref().map(ToString::to_string),
        scenario,
        &sim.derived,
    );
    Ok((sim, report))
}
