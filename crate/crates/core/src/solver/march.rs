//! Downstream integration of the droplet mass `c m' = -tau phi(u, m)` on a
//! grid where `u` is taken piecewise linear.

use crate::model::{VaporisationKind, VaporisationLaw};

const FRONT_BISECTIONS: usize = 60;

/// Result of marching one bin over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinMarch {
    pub m: Vec<f64>,
    /// Where vaporisation starts (first crossing of `theta_v`).
    pub onset: Option<f64>,
    /// Where the bin is fully vaporised, `None` if it survives the domain.
    pub front: Option<f64>,
}

/// Portion `[s0, s1]` of a unit cell where the linear interpolant of `u`
/// is at or above `theta`.
fn active_span(u0: f64, u1: f64, theta: f64) -> Option<(f64, f64)> {
    match (u0 >= theta, u1 >= theta) {
        (true, true) => Some((0.0, 1.0)),
        (false, false) => None,
        (false, true) => Some(((theta - u0) / (u1 - u0), 1.0)),
        (true, false) => Some((0.0, (theta - u0) / (u1 - u0))),
    }
}

/// Mass at the right end of a cell of width `h`, and the fraction of the
/// cell at which the droplet vanished, if it did. Not used for the
/// instantaneous law, which is handled at profile level.
pub(crate) fn march_cell(
    law: &VaporisationLaw,
    m0: f64,
    u0: f64,
    u1: f64,
    c: f64,
    tau: f64,
    h: f64,
) -> (f64, Option<f64>) {
    if m0 <= 0.0 || tau == 0.0 {
        return (m0.max(0.0), None);
    }
    let Some((s0, s1)) = active_span(u0, u1, law.theta_v()) else {
        return (m0, None);
    };
    let length = (s1 - s0) * h;
    if length <= 0.0 {
        return (m0, None);
    }
    match law.kind() {
        VaporisationKind::PowerLaw { .. } => {
            // The march variable decreases linearly in x above onset.
            let w0 = law.to_march(m0);
            let slope = tau * law.march_rate(1.0, w0) / c;
            let w1 = w0 + slope * length;
            if w1 > 0.0 {
                (law.mass_from_march(w1), None)
            } else {
                (0.0, Some(s0 + (w0 / -slope) / h))
            }
        }
        VaporisationKind::TabulatedLipschitz { .. } => {
            let u_at = |s: f64| u0 + (u1 - u0) * s;
            let step = |len: f64| -> f64 {
                let rhs = |s: f64, m: f64| tau * law.march_rate(u_at(s), m) / c;
                let ds = len / h;
                let k1 = rhs(s0, m0);
                let k2 = rhs(s0 + 0.5 * ds, m0 + 0.5 * len * k1);
                let k3 = rhs(s0 + 0.5 * ds, m0 + 0.5 * len * k2);
                let k4 = rhs(s0 + ds, m0 + len * k3);
                m0 + len / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            };
            let m1 = step(length);
            if m1 > 0.0 {
                return (m1, None);
            }
            let (mut lo, mut hi) = (0.0, length);
            for _ in 0..FRONT_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if step(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.0, Some(s0 + 0.5 * (lo + hi) / h))
        }
        VaporisationKind::InstantaneousDirac => (m0, None),
    }
}

/// First cell `k` (joining nodes `k - 1` and `k`) where `u` reaches
/// `theta`, with the crossing fraction inside that cell.
pub(crate) fn first_crossing(u: &[f64], theta: f64) -> Option<(usize, f64)> {
    if u.first().is_some_and(|&u0| u0 >= theta) {
        return Some((1, 0.0));
    }
    (1..u.len()).find(|&k| u[k] >= theta).map(|k| (k, ((theta - u[k - 1]) / (u[k] - u[k - 1])).clamp(0.0, 1.0)))
}

/// Marches one bin with speed `c[k]` used on the cell ending at node `k`.
pub fn march_bin(law: &VaporisationLaw, m_u: f64, x: &[f64], u: &[f64], c: &[f64], tau: f64) -> BinMarch {
    let n = x.len();
    let theta_v = law.theta_v();
    let crossing = first_crossing(u, theta_v);
    let onset = crossing.map(|(k, s)| x[k - 1] + s * (x[k] - x[k - 1]));
    let mut m = vec![m_u; n];
    if law.is_instantaneous() {
        let mut front = None;
        if let Some((k, _)) = crossing {
            let rest = (1.0 - tau) * m_u;
            m[k..].iter_mut().for_each(|mi| *mi = rest);
            if rest == 0.0 {
                front = onset;
            }
        }
        return BinMarch { m, onset, front };
    }
    let mut front = None;
    for k in 1..n {
        let h = x[k] - x[k - 1];
        let (next, vanished) = march_cell(law, m[k - 1], u[k - 1], u[k], c[k], tau, h);
        m[k] = next;
        if front.is_none() {
            if let Some(s) = vanished {
                front = Some(x[k - 1] + s * h);
            }
        }
    }
    BinMarch { m, onset, front }
}
