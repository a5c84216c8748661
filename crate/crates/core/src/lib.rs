//! Simulation and certificate monitoring for a layered controller of a
//! cable-driven lower-limb exoskeleton.
//!
//! The joint layer is a robust high-gain tracking law. Each joint is driven
//! by an antagonistic motor pair whose follower is synchronized to the lead
//! by a sliding-mode law, and lead roles switch with the sign of the joint
//! input. Runtime monitors check Lyapunov envelopes and the average dwell
//! time condition on simulated logs.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod joint;
pub mod motor;
pub mod sim;
pub mod switching;
pub mod sync;

pub use error::{Error, Result};
