//! Independent reference integrator for the droplet mass equation: classical
//! RK4 with step doubling and local error control, driven directly by the
//! public vaporisation rate. Used to cross-check the grid march.

use crate::error::{Error, Result};
use crate::model::VaporisationLaw;

const MAX_STEPS: usize = 10_000_000;

/// Integrates `c m' = -phi(u(x), m)` from `m(x[0]) = m_u` and reports `m` at
/// every abscissa in `x` (ascending). `tol` bounds the local error per step.
pub fn oracle_mass_march(
    u: &dyn Fn(f64) -> f64,
    x: &[f64],
    c: f64,
    law: &VaporisationLaw,
    m_u: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(c > 0.0) {
        return Err(Error::InvalidSpeed(c));
    }
    if law.is_instantaneous() {
        return Err(Error::Oracle("the instantaneous law has no finite rate".into()));
    }
    if x.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Oracle("abscissae must be ascending".into()));
    }
    let rhs = |s: f64, m: f64| -law.rate(u(s), m.max(0.0)) / c;
    let rk4 = |s: f64, m: f64, h: f64| {
        let k1 = rhs(s, m);
        let k2 = rhs(s + 0.5 * h, m + 0.5 * h * k1);
        let k3 = rhs(s + 0.5 * h, m + 0.5 * h * k2);
        let k4 = rhs(s + h, m + h * k3);
        (m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0)
    };
    let mut out = Vec::with_capacity(x.len());
    let Some(&x0) = x.first() else {
        return Ok(out);
    };
    let mut s = x0;
    let mut m = m_u;
    let mut h = ((x[x.len() - 1] - x0) / 100.0).max(1e-6);
    let mut steps = 0;
    for &target in x {
        while s < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Oracle("step budget exhausted".into()));
            }
            if m == 0.0 {
                // phi(u, 0) = 0: nothing left to integrate.
                s = target;
                break;
            }
            let step = h.min(target - s);
            let full = rk4(s, m, step);
            let half = rk4(s + 0.5 * step, rk4(s, m, 0.5 * step), 0.5 * step);
            let err = (half - full).abs() / 15.0;
            if err <= tol {
                s += step;
                // Land exactly on the target to avoid a sliver step.
                if target - s < 1e-14 * (1.0 + target.abs()) {
                    s = target;
                }
                m = (half + (half - full) / 15.0).max(0.0);
                let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
                h = step * grow;
            } else {
                h = step * (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.5);
                if h < 1e-15 * (1.0 + s.abs()) {
                    return Err(Error::Oracle(format!("step underflow at x = {s}")));
                }
            }
        }
        out.push(m);
    }
    Ok(out)
}
