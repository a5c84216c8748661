//! Classical fixed-step Runge-Kutta integration.

use nalgebra::SVector;

use crate::dynamics::{forward_dynamics, ExoState, PlantParams, Vec4};
use crate::error::Result;

/// One RK4 step of `x' = f(t, x)`. Errors raised by `f` abort the step.
pub fn rk4_step<const N: usize, F>(mut f: F, t: f64, x: &SVector<f64, N>, h: f64) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, &(x + 0.5 * h * k1))?;
    let k3 = f(t + 0.5 * h, &(x + 0.5 * h * k2))?;
    let k4 = f(t + h, &(x + h * k3))?;
    Ok(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// Integrates the leg model under a constant joint torque for `steps` steps.
pub fn simulate_plant(s0: &ExoState, tau: &Vec4, p: &PlantParams, h: f64, steps: usize) -> Result<ExoState> {
    let mut x = SVector::<f64, 8>::zeros();
    x.fixed_rows_mut::<4>(0).copy_from(&s0.q);
    x.fixed_rows_mut::<4>(4).copy_from(&s0.qdot);
    let mut t = s0.t;
    let rhs = |t: f64, x: &SVector<f64, 8>| -> Result<SVector<f64, 8>> {
        let s = ExoState { q: x.fixed_rows::<4>(0).into(), qdot: x.fixed_rows::<4>(4).into(), t };
        let qddot = forward_dynamics(&s, tau, p)?;
        let mut dx = SVector::<f64, 8>::zeros();
        dx.fixed_rows_mut::<4>(0).copy_from(&s.qdot);
        dx.fixed_rows_mut::<4>(4).copy_from(&qddot);
        Ok(dx)
    };
    for k in 0..steps {
        x = rk4_step(rhs, t, &x, h)?;
        t = s0.t + (k + 1) as f64 * h;
    }
    ExoState::new(x.fixed_rows::<4>(0).into(), x.fixed_rows::<4>(4).into(), t)
}
