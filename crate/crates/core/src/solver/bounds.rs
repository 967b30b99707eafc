//! A priori bracket for the wave speed on a bounded domain.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::WaveProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityBounds {
    pub c_lo: f64,
    pub c_hi: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Speed below which droplets cannot finish vaporising before ignition;
    /// infinite without liquid.
    pub c_star_bound: f64,
    /// Smallest half-width for which the bracket is asserted.
    pub a_star: f64,
    pub theta_star: f64,
    /// `a < a_star`: the bracket is reported but not guaranteed.
    pub below_a_star: bool,
}

impl VelocityBounds {
    pub fn contains(&self, c: f64, tol: f64) -> bool {
        self.c_lo - tol <= c && c <= self.c_hi + tol
    }
}

/// Bracket on half-width `a`; `u_prime_at_a` is the slope of `u` at the right
/// boundary (0 in the real-line limit).
pub fn velocity_bounds(problem: &WaveProblem, a: f64, u_prime_at_a: f64) -> Result<VelocityBounds> {
    let lambda = problem.config.lambda();
    let reaction = &problem.laws.reaction;
    let vap = &problem.laws.vaporisation;
    let theta_i = reaction.theta_i();
    let theta_v = vap.theta_v();
    let beta1 = 1f64.min(1.0 / lambda);
    let beta2 = 1f64.max(1.0 / lambda);
    let g1 = reaction.integral(1.0)?;
    let m_f = reaction.sup();

    let c1 = (2.0 * beta1 * g1).sqrt();
    let c2 = (2.0 * beta2 * (g1 + u_prime_at_a * u_prime_at_a)).sqrt() / theta_i;

    let theta_star = 0.5 * (theta_v + theta_i);
    let m_u = problem.config.max_droplet_mass();
    let c_star_bound = if m_u > 0.0 {
        let t = vap.vaporisation_time(theta_star, m_u)?;
        if t > 0.0 {
            ((theta_i / theta_star).ln() / t).sqrt()
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    let a_star = (theta_i / theta_v).ln() / c_star_bound;
    let c3 = m_f.max((4.0 / theta_i).ln() / a_star).max(2.0 * (m_f / theta_i).sqrt());

    Ok(VelocityBounds {
        c_lo: c_star_bound.min(c1),
        c_hi: c2.min(c3),
        c1,
        c2,
        c3,
        c_star_bound,
        a_star,
        theta_star,
        below_a_star: a < a_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlameConfig, Laws, ReactionLaw, VaporisationLaw};

    fn problem(lambda: f64, eps: f64, n0: f64, m_u: f64) -> WaveProblem {
        let laws =
            Laws::new(ReactionLaw::arrhenius(0.5, eps).unwrap(), VaporisationLaw::power_law(0.25, 1.0, 0.0).unwrap())
                .unwrap();
        let config = if n0 > 0.0 {
            FlameConfig::monodisperse(lambda, n0, m_u).unwrap()
        } else {
            FlameConfig::gaseous(lambda).unwrap()
        };
        WaveProblem::new(laws, config)
    }

    #[test]
    fn spray_example_values() {
        let b = velocity_bounds(&problem(1.0, 0.1, 0.5, 1.0), 30.0, 0.0).unwrap();
        assert_eq!(b.theta_star, 0.375);
        assert!((b.c_star_bound - (4f64 / 3.0).ln().sqrt()).abs() < 1e-14);
        assert!((b.c_star_bound - 0.5364).abs() < 5e-5);
        assert!((b.a_star - 1.292).abs() < 5e-4);
        assert!(!b.below_a_star);
        let near = velocity_bounds(&problem(1.0, 0.1, 0.5, 1.0), 1.0, 0.0).unwrap();
        assert!(near.below_a_star);
    }

    #[test]
    fn unit_lewis_collapse() {
        let p = problem(1.0, 0.1, 0.0, 0.0);
        let b = velocity_bounds(&p, 30.0, 0.0).unwrap();
        let g = p.laws.reaction.integral(1.0).unwrap();
        assert!((b.c1 - (2.0 * g).sqrt()).abs() < 1e-15);
        assert!((b.c2 - b.c1 / 0.5).abs() < 1e-14);
        assert!(b.c_star_bound.is_infinite() && b.a_star == 0.0);
        assert!(b.c3.is_infinite());
        assert_eq!(b.c_hi, b.c2);
        assert_eq!(b.c_lo, b.c1);
    }
}
