//! High-activation-energy limit: the reaction collapses onto a Dirac source at
//! `x_bar = -ln(theta_i) / c`, upstream of which the temperature is a pure
//! exponential preheat profile.
//!
//! Positions use the same pinning `u(0) = theta_i` as the bounded solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FlameConfig, Laws, VaporisationKind, VaporisationLaw};
use crate::quad::adaptive_simpson;
use crate::solver::march::march_cell;

const BRACKET_GROWTHS: usize = 40;
const BISECTION_RTOL: f64 = 1e-14;
const TIE_RTOL: f64 = 1e-12;
const V_QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    DiffusionLimited,
    VaporisationControlled,
}

pub fn gaseous_limit_speed(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(Error::Domain(format!("need lambda, mu > 0, got {lambda}, {mu}")));
    }
    Ok((2.0 * mu / lambda).sqrt())
}

/// `u = theta_i e^{c x}` up to `x_bar`, then 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreheatProfile {
    pub c: f64,
    pub theta_i: f64,
    pub x_bar: f64,
}

impl PreheatProfile {
    pub fn new(c: f64, theta_i: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSpeed(c));
        }
        if !(theta_i > 0.0 && theta_i < 1.0) {
            return Err(Error::Domain(format!("theta_i must lie in (0, 1), got {theta_i}")));
        }
        Ok(Self { c, theta_i, x_bar: -theta_i.ln() / c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x >= self.x_bar {
            1.0
        } else {
            self.theta_i * (self.c * x).exp()
        }
    }

    /// Where the preheat profile reaches `theta`.
    pub fn position_of(&self, theta: f64) -> f64 {
        (theta / self.theta_i).ln() / self.c
    }
}

pub fn preheat_profile(c: f64, theta_i: f64) -> Result<PreheatProfile> {
    PreheatProfile::new(c, theta_i)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontOfSpeed {
    pub x_v: f64,
    pub x_vf: f64,
    /// The droplets outlive the reaction zone, which cannot happen in the limit.
    pub infeasible: bool,
}

/// Marching step used along the preheat profile for tabulated laws.
fn preheat_step(c: f64, x_v: f64, x_bar: f64) -> f64 {
    (0.01 / c).min((x_bar - x_v) / 1000.0)
}

/// Mass of one droplet class along the preheat profile at speed `c`, as
/// `(x, m)` samples from onset up to the front or `x_bar`, whichever is first.
/// Beyond `x_bar` the remaining time is `tau(1, m)`.
fn march_preheat(c: f64, m_u: f64, laws: &Laws) -> Result<(Vec<(f64, f64)>, f64)> {
    let pre = PreheatProfile::new(c, laws.reaction.theta_i())?;
    let vap = &laws.vaporisation;
    let x_v = pre.position_of(vap.theta_v());
    let mut samples = vec![(x_v, m_u)];
    if m_u == 0.0 {
        return Ok((samples, x_v));
    }
    let h = preheat_step(c, x_v, pre.x_bar);
    let steps = ((pre.x_bar - x_v) / h).ceil() as usize;
    let h = (pre.x_bar - x_v) / steps as f64;
    let mut m = m_u;
    for k in 0..steps {
        let x0 = x_v + k as f64 * h;
        let x1 = if k + 1 == steps { pre.x_bar } else { x0 + h };
        // Clamp the left end so the active span starts exactly at onset.
        let u0 = if k == 0 { vap.theta_v() } else { pre.eval(x0) };
        let u1 = if k + 1 == steps { 1.0 } else { pre.eval(x1) };
        let (next, vanished) = march_cell(vap, m, u0, u1, c, 1.0, x1 - x0);
        if let Some(s) = vanished {
            let front = x0 + s * (x1 - x0);
            samples.push((front, 0.0));
            return Ok((samples, front));
        }
        m = next;
        samples.push((x1, m));
    }
    let rest = vap.vaporisation_time(1.0, m)?;
    Ok((samples, pre.x_bar + c * rest))
}

/// Onset and complete-vaporisation positions of a droplet of mass `m_u`
/// advected at speed `c` through the preheat profile.
pub fn vaporisation_front_of_speed(c: f64, m_u: f64, laws: &Laws) -> Result<FrontOfSpeed> {
    let pre = PreheatProfile::new(c, laws.reaction.theta_i())?;
    let vap = &laws.vaporisation;
    let x_v = pre.position_of(vap.theta_v());
    let x_vf = match vap.kind() {
        // Above onset the power-law rate does not depend on u.
        VaporisationKind::PowerLaw { .. } => x_v + c * vap.vaporisation_time(1.0, m_u)?,
        VaporisationKind::InstantaneousDirac => x_v,
        VaporisationKind::TabulatedLipschitz { .. } => march_preheat(c, m_u, laws)?.1,
    };
    Ok(FrontOfSpeed { x_v, x_vf, infeasible: x_vf > pre.x_bar })
}

fn front_gap(c: f64, m_u: f64, laws: &Laws) -> Result<f64> {
    let front = vaporisation_front_of_speed(c, m_u, laws)?;
    let x_bar = -laws.reaction.theta_i().ln() / c;
    Ok(front.x_vf - x_bar)
}

/// Speed at which droplets of mass `m_u` finish vaporising exactly at the
/// reaction front. Infinite for instantaneous vaporisation or no mass.
pub fn c_star(m_u: f64, laws: &Laws) -> Result<f64> {
    if laws.vaporisation.is_instantaneous() || m_u == 0.0 {
        return Ok(f64::INFINITY);
    }
    let gap = |c: f64| front_gap(c, m_u, laws);
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut growths = 0;
    while gap(lo)? >= 0.0 {
        lo *= 0.5;
        growths += 1;
        if growths > BRACKET_GROWTHS {
            return Err(Error::RootNotBracketed { growths });
        }
    }
    while gap(hi)? <= 0.0 {
        hi *= 2.0;
        growths += 1;
        if growths > BRACKET_GROWTHS {
            return Err(Error::RootNotBracketed { growths });
        }
    }
    bisect(lo, hi, gap)
}

/// Bisection on an increasing function with `g(lo) < 0 < g(hi)`.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    while hi - lo > BISECTION_RTOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaeSolution {
    pub c: f64,
    pub regime: Regime,
    /// `c_star` equals the gaseous speed to within the tie tolerance.
    pub boundary: bool,
    pub c_gas: f64,
    /// Binding vaporisation speed (minimum over bins), infinite without liquid.
    pub c_star: f64,
    pub x_bar: f64,
    pub x_v: f64,
    /// Furthest complete-vaporisation point over bins; `None` without liquid.
    pub x_vf: Option<f64>,
    pub bin_c_star: Vec<f64>,
    pub bin_fronts: Vec<Option<f64>>,
}

/// Limit speed `min(sqrt(2 mu / lambda), c_star)` and regime, for any number
/// of bins: each bin's front is computed along the shared preheat profile and
/// the slowest bin binds.
pub fn limit_speed_and_regime(laws: &Laws, config: &FlameConfig) -> Result<HaeSolution> {
    let mu = laws.reaction.mu();
    let c_gas = gaseous_limit_speed(config.lambda(), mu)?;
    let bin_c_star = config
        .bins()
        .iter()
        .map(|b| if b.n0 > 0.0 && b.m_u > 0.0 { c_star(b.m_u, laws) } else { Ok(f64::INFINITY) })
        .collect::<Result<Vec<_>>>()?;
    let c_star_min = bin_c_star.iter().copied().fold(f64::INFINITY, f64::min);
    let boundary = (c_star_min - c_gas).abs() <= TIE_RTOL * c_gas;
    let (c, regime) = if c_star_min < c_gas && !boundary {
        (c_star_min, Regime::VaporisationControlled)
    } else {
        (c_gas, Regime::DiffusionLimited)
    };
    let pre = PreheatProfile::new(c, laws.reaction.theta_i())?;
    let x_v = pre.position_of(laws.vaporisation.theta_v());
    let mut bin_fronts = Vec::with_capacity(config.bins().len());
    for b in config.bins() {
        if b.n0 > 0.0 && b.m_u > 0.0 {
            let front = vaporisation_front_of_speed(c, b.m_u, laws)?;
            // The binding bin sits at the reaction front by construction.
            bin_fronts.push(Some(front.x_vf.min(pre.x_bar)));
        } else {
            bin_fronts.push(None);
        }
    }
    let x_vf = bin_fronts.iter().flatten().copied().reduce(f64::max);
    Ok(HaeSolution {
        c,
        regime,
        boundary,
        c_gas,
        c_star: c_star_min,
        x_bar: pre.x_bar,
        x_v,
        x_vf,
        bin_c_star,
        bin_fronts,
    })
}

/// Same classification as [`limit_speed_and_regime`]; kept as a separate
/// entry point for bin-resolved reporting.
pub fn polydisperse_regime(laws: &Laws, config: &FlameConfig) -> Result<HaeSolution> {
    limit_speed_and_regime(laws, config)
}

/// Initial droplet mass at which the vaporisation speed equals the gaseous
/// limit speed.
pub fn critical_mass(laws: &Laws, lambda: f64) -> Result<f64> {
    if laws.vaporisation.is_instantaneous() {
        return Err(Error::InvalidLaw("instantaneous vaporisation never limits the speed".into()));
    }
    let c_gas = gaseous_limit_speed(lambda, laws.reaction.mu())?;
    // c_star decreases with m_u, so c_gas - c_star increases.
    let g = |m: f64| -> Result<f64> { Ok(c_gas - c_star(m, laws)?) };
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut growths = 0;
    while g(lo)? >= 0.0 {
        lo *= 0.5;
        growths += 1;
        if growths > BRACKET_GROWTHS {
            return Err(Error::RootNotBracketed { growths });
        }
    }
    while g(hi)? <= 0.0 {
        hi *= 2.0;
        growths += 1;
        if growths > BRACKET_GROWTHS {
            return Err(Error::RootNotBracketed { growths });
        }
    }
    bisect(lo, hi, g)
}

/// Assume the gaseous speed and check whether every bin finishes vaporising
/// before the reaction front. The witness is `x_bar - max x_vf`.
pub fn heuristic_regime_test(laws: &Laws, config: &FlameConfig) -> Result<(Regime, f64)> {
    let c = gaseous_limit_speed(config.lambda(), laws.reaction.mu())?;
    let x_bar = -laws.reaction.theta_i().ln() / c;
    let mut witness = f64::INFINITY;
    for b in config.active_bins() {
        let front = vaporisation_front_of_speed(c, b.m_u, laws)?;
        witness = witness.min(x_bar - front.x_vf);
    }
    let regime = if witness >= -TIE_RTOL * x_bar.abs().max(1.0) {
        Regime::DiffusionLimited
    } else {
        Regime::VaporisationControlled
    };
    Ok((regime, witness))
}

/// Closed forms for `c m' = -g0 m^delta` above onset, with the front at `x_vf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawClosedForm {
    pub c: f64,
    pub g0: f64,
    pub delta: f64,
    pub m_u: f64,
    pub x_v: f64,
    pub x_vf: f64,
}

impl PowerLawClosedForm {
    pub fn new(c: f64, law: &VaporisationLaw, m_u: f64, x_v: f64) -> Result<Self> {
        let VaporisationKind::PowerLaw { g0, delta } = *law.kind() else {
            return Err(Error::InvalidLaw("closed forms need a power law".into()));
        };
        if !(c > 0.0) {
            return Err(Error::InvalidSpeed(c));
        }
        let x_vf = x_v + c * m_u.powf(1.0 - delta) / ((1.0 - delta) * g0);
        Ok(Self { c, g0, delta, m_u, x_v, x_vf })
    }

    fn coefficient(&self) -> f64 {
        ((1.0 - self.delta) * self.g0 / self.c).powf(1.0 / (1.0 - self.delta))
    }

    pub fn m(&self, x: f64) -> f64 {
        if x <= self.x_v {
            self.m_u
        } else if x >= self.x_vf {
            0.0
        } else {
            self.coefficient() * (self.x_vf - x).powf(1.0 / (1.0 - self.delta))
        }
    }

    /// `M(x) = int_x^inf m`.
    pub fn big_m(&self, x: f64) -> f64 {
        let tail = |x: f64| {
            let p = (2.0 - self.delta) / (1.0 - self.delta);
            self.coefficient() / p * (self.x_vf - x).max(0.0).powf(p)
        };
        if x <= self.x_v {
            self.m_u * (self.x_v - x) + tail(self.x_v)
        } else {
            tail(x)
        }
    }

    /// Exponent relating the front excess to `M`: `(1 - delta) / (2 - delta)`.
    pub fn overlap_exponent(&self) -> f64 {
        overlap_exponent(self.delta)
    }
}

pub fn overlap_exponent(delta: f64) -> f64 {
    (1.0 - delta) / (2.0 - delta)
}

#[derive(Debug, Clone, PartialEq)]
enum MassProfile {
    None,
    Power(PowerLawClosedForm),
    Step {
        m_u: f64,
        x_v: f64,
    },
    /// Piecewise-linear through marched samples; constant before the first.
    Sampled {
        m_u: f64,
        samples: Vec<(f64, f64)>,
    },
}

impl MassProfile {
    fn eval(&self, x: f64) -> f64 {
        match self {
            MassProfile::None => 0.0,
            MassProfile::Power(p) => p.m(x),
            MassProfile::Step { m_u, x_v } => {
                if x < *x_v {
                    *m_u
                } else {
                    0.0
                }
            }
            MassProfile::Sampled { m_u, samples } => {
                let (x0, _) = samples[0];
                let (xn, mn) = samples[samples.len() - 1];
                if x <= x0 {
                    return *m_u;
                }
                if x >= xn {
                    return mn;
                }
                let i = samples.partition_point(|&(s, _)| s <= x);
                let (xa, ma) = samples[i - 1];
                let (xb, mb) = samples[i];
                ma + (mb - ma) * (x - xa) / (xb - xa)
            }
        }
    }

    /// Where the mass starts and stops varying.
    fn support(&self) -> Option<(f64, f64)> {
        match self {
            MassProfile::None | MassProfile::Step { .. } => None,
            MassProfile::Power(p) => Some((p.x_v, p.x_vf)),
            MassProfile::Sampled { samples, .. } => Some((samples[0].0, samples[samples.len() - 1].0)),
        }
    }
}

/// Limit profiles for a computed [`HaeSolution`].
#[derive(Debug, Clone)]
pub struct LimitProfiles {
    pub header: HaeSolution,
    pub theta_i: f64,
    pub lambda: f64,
    pub v_u: f64,
    n0: Vec<f64>,
    mass: Vec<MassProfile>,
    /// Breakpoints of `1 - sum n0 m` on `(-inf, x_bar)`, ascending.
    knots: Vec<f64>,
}

pub fn limit_profiles(header: &HaeSolution, laws: &Laws, config: &FlameConfig) -> Result<LimitProfiles> {
    let c = header.c;
    let vap = &laws.vaporisation;
    let mut mass = Vec::with_capacity(config.bins().len());
    let mut knots = vec![header.x_v];
    for b in config.bins() {
        let profile = if b.n0 == 0.0 || b.m_u == 0.0 {
            MassProfile::None
        } else {
            match vap.kind() {
                VaporisationKind::PowerLaw { .. } => {
                    let mut p = PowerLawClosedForm::new(c, vap, b.m_u, header.x_v)?;
                    // Floating-point: the binding front sits exactly at x_bar.
                    p.x_vf = p.x_vf.min(header.x_bar);
                    MassProfile::Power(p)
                }
                VaporisationKind::InstantaneousDirac => MassProfile::Step { m_u: b.m_u, x_v: header.x_v },
                VaporisationKind::TabulatedLipschitz { .. } => {
                    let (samples, _) = march_preheat(c, b.m_u, laws)?;
                    MassProfile::Sampled { m_u: b.m_u, samples }
                }
            }
        };
        if let Some((_, end)) = profile.support() {
            knots.push(end.min(header.x_bar));
        }
        mass.push(profile);
    }
    knots.push(header.x_bar);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    Ok(LimitProfiles {
        header: header.clone(),
        theta_i: laws.reaction.theta_i(),
        lambda: config.lambda(),
        v_u: config.v_u(),
        n0: config.bins().iter().map(|b| b.n0).collect(),
        mass,
        knots,
    })
}

/// Limit profiles for instantaneous vaporisation, where the speed is always
/// the gaseous one.
pub fn instantaneous_profiles(laws: &Laws, config: &FlameConfig) -> Result<LimitProfiles> {
    if !laws.vaporisation.is_instantaneous() {
        return Err(Error::InvalidLaw("expected the instantaneous vaporisation law".into()));
    }
    let header = limit_speed_and_regime(laws, config)?;
    limit_profiles(&header, laws, config)
}

impl LimitProfiles {
    pub fn c(&self) -> f64 {
        self.header.c
    }

    pub fn u(&self, x: f64) -> f64 {
        let x_bar = self.header.x_bar;
        if x >= x_bar {
            1.0
        } else {
            self.theta_i * (self.header.c * x).exp()
        }
    }

    pub fn m(&self, bin: usize, x: f64) -> f64 {
        self.mass[bin].eval(x)
    }

    /// `sum_j n0_j m_j(x)`.
    pub fn liquid(&self, x: f64) -> f64 {
        self.n0.iter().zip(&self.mass).map(|(n0, p)| n0 * p.eval(x)).sum()
    }

    /// `v(x) = (c / Lambda) int_x^{x_bar} (1 - liquid(s)) e^{c (x - s) / Lambda} ds`
    /// for `x < x_bar`, zero after.
    pub fn v(&self, x: f64) -> f64 {
        let x_bar = self.header.x_bar;
        if x >= x_bar {
            return 0.0;
        }
        let k = self.header.c / self.lambda;
        let load_u: f64 = self.n0.iter().zip(&self.mass).map(|(n0, p)| n0 * p.eval(f64::NEG_INFINITY)).sum();
        // Split at the knots; on pieces where the liquid is constant the
        // integral is explicit, elsewhere adaptive quadrature.
        let mut total = 0.0;
        let mut lo = x;
        let first = self.knots[0];
        if lo < first {
            let hi = first.min(x_bar);
            total += (1.0 - load_u) * ((k * (x - lo)).exp() - (k * (x - hi)).exp());
            lo = hi;
        }
        for w in self.knots.windows(2) {
            let (a, b) = (w[0].max(lo), w[1].min(x_bar));
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let varying = self.mass.iter().any(|p| p.support().is_some_and(|(s0, s1)| mid > s0 && mid < s1));
            if varying {
                let g = |s: f64| (1.0 - self.liquid(s)) * k * (k * (x - s)).exp();
                total += adaptive_simpson(&g, a, b, V_QUAD_TOL);
            } else {
                let level = 1.0 - self.liquid(mid);
                total += level * ((k * (x - a)).exp() - (k * (x - b)).exp());
            }
        }
        total
    }

    /// Total flux `-Lambda v' + c v + c sum n0 m`, with `v'` from a central
    /// difference of width `dx` on the evaluator.
    pub fn flux(&self, x: f64, dx: f64) -> f64 {
        let dv = (self.v(x + dx) - self.v(x - dx)) / (2.0 * dx);
        -self.lambda * dv + self.header.c * (self.v(x) + self.liquid(x))
    }

    /// Points where profiles have derivative jumps.
    pub fn kinks(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DropletBin, ReactionLaw};
    use proptest::prelude::*;

    fn laws(delta: f64, g0: f64, theta_v: f64) -> Laws {
        Laws::new(ReactionLaw::arrhenius(0.5, 0.05).unwrap(), VaporisationLaw::power_law(theta_v, g0, delta).unwrap())
            .unwrap()
    }

    fn mono(m_u: f64, n0: f64, lambda: f64) -> FlameConfig {
        FlameConfig::monodisperse(lambda, n0, m_u).unwrap()
    }

    const INV_E: f64 = 0.36787944117144233;

    #[test]
    fn gaseous_speed_examples() {
        assert!((gaseous_limit_speed(1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(gaseous_limit_speed(2.0, 2.0).unwrap(), 2f64.sqrt());
        assert_eq!(gaseous_limit_speed(2.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn preheat_examples() {
        let p = preheat_profile(1.0, INV_E).unwrap();
        assert!((p.x_bar - 1.0).abs() < 1e-15);
        let p = preheat_profile(2f64.sqrt(), 0.5).unwrap();
        assert!((p.x_bar - 0.49012).abs() < 1e-5);
        assert_eq!(p.eval(0.0), 0.5);
        assert_eq!(p.eval(p.x_bar + 1.0), 1.0);
    }

    #[test]
    fn front_of_speed_example() {
        let l =
            Laws::new(ReactionLaw::arrhenius(0.5, 0.05).unwrap(), VaporisationLaw::power_law(0.25, 1.0, 0.0).unwrap())
                .unwrap();
        let f = vaporisation_front_of_speed(1.0, 0.3, &l).unwrap();
        assert!((f.x_v + 2f64.ln()).abs() < 1e-15);
        assert!((f.x_vf - (0.3 - 2f64.ln())).abs() < 1e-15);
        let tiny = vaporisation_front_of_speed(1.0, 1e-14, &l).unwrap();
        assert!((tiny.x_vf - tiny.x_v).abs() < 1e-13);
    }

    #[test]
    fn c_star_closed_forms() {
        let l = laws(0.0, 1.0, INV_E);
        assert!((c_star(1.0, &l).unwrap() - 1.0).abs() < 1e-12);
        assert!((c_star(4.0, &l).unwrap() - 0.5).abs() < 1e-12);
        for &g0 in &[0.5, 1.0, 3.0] {
            for &theta_v in &[0.1, 0.25, 0.45] {
                let l = laws(0.0, g0, theta_v);
                for &m in &[0.05, 0.7, 2.0] {
                    let exact = (g0 * (1.0 / theta_v).ln() / m).sqrt();
                    let got = c_star(m, &l).unwrap();
                    assert!((got - exact).abs() <= 1e-8 * exact, "{g0} {theta_v} {m}");
                }
                let m_crit = critical_mass(&l, 1.0).unwrap();
                let exact = g0 * (1.0 / theta_v).ln() / 2.0;
                assert!((m_crit - exact).abs() <= 1e-8 * exact);
            }
        }
    }

    #[test]
    fn regime_examples() {
        let l = laws(0.0, 1.0, INV_E);
        let gas = limit_speed_and_regime(&l, &FlameConfig::gaseous(1.0).unwrap()).unwrap();
        assert_eq!(gas.regime, Regime::DiffusionLimited);
        assert!(gas.x_vf.is_none());
        let heavy = limit_speed_and_regime(&l, &mono(4.0, 0.1, 1.0)).unwrap();
        assert_eq!(heavy.regime, Regime::VaporisationControlled);
        assert!((heavy.c - 0.5).abs() < 1e-12);
        assert!((heavy.x_vf.unwrap() - heavy.x_bar).abs() < 1e-12);
        let light = limit_speed_and_regime(&l, &mono(0.1, 1.0, 1.0)).unwrap();
        assert_eq!(light.regime, Regime::DiffusionLimited);
        assert!((light.c - 2f64.sqrt()).abs() < 1e-12);
        assert!((light.c_star - 10f64.sqrt()).abs() < 1e-10);
        for cfg in [FlameConfig::gaseous(1.0).unwrap(), mono(4.0, 0.1, 1.0), mono(0.1, 1.0, 1.0)] {
            let full = limit_speed_and_regime(&l, &cfg).unwrap();
            assert_eq!(heuristic_regime_test(&l, &cfg).unwrap().0, full.regime);
        }
    }

    #[test]
    fn critical_mass_examples() {
        let l = laws(0.0, 1.0, INV_E);
        assert!((critical_mass(&l, 1.0).unwrap() - 0.5).abs() < 1e-10);
        assert!((critical_mass(&l, 2.0).unwrap() - 1.0).abs() < 1e-10);
        let l2 = laws(0.0, 2.0, INV_E);
        assert!((critical_mass(&l2, 1.0).unwrap() - 1.0).abs() < 1e-10);
        let m = critical_mass(&l, 1.0).unwrap();
        let (regime, witness) = heuristic_regime_test(&l, &mono(m, 0.5, 1.0)).unwrap();
        assert!(witness.abs() < 1e-8);
        assert_eq!(regime, Regime::DiffusionLimited);
    }

    #[test]
    fn polydisperse_largest_bin_binds() {
        let l = laws(0.0, 1.0, INV_E);
        let big = 0.9;
        let cfg = FlameConfig::new(
            1.0,
            1.0 - 0.5 * 0.1 - 0.5 * big,
            vec![DropletBin { n0: 0.5, m_u: 0.1 }, DropletBin { n0: 0.5, m_u: big }],
        )
        .unwrap();
        let poly = polydisperse_regime(&l, &cfg).unwrap();
        let single = limit_speed_and_regime(&l, &mono(big, 0.5, 1.0)).unwrap();
        assert_eq!(poly.regime, single.regime);
        assert_eq!(poly.c, single.c);
        let with_empty =
            FlameConfig::new(1.0, cfg.v_u(), vec![cfg.bins()[0], cfg.bins()[1], DropletBin { n0: 0.3, m_u: 0.0 }])
                .unwrap();
        let again = polydisperse_regime(&l, &with_empty).unwrap();
        assert_eq!(again.c, poly.c);
        assert_eq!(again.regime, poly.regime);
    }

    #[test]
    fn gaseous_v_profile_closed_form() {
        let l = laws(0.0, 1.0, INV_E);
        let cfg = FlameConfig::gaseous(1.0).unwrap();
        let h = limit_speed_and_regime(&l, &cfg).unwrap();
        let p = limit_profiles(&h, &l, &cfg).unwrap();
        for i in 0..200 {
            let x = -10.0 + 0.06 * i as f64;
            let exact = if x < h.x_bar { 1.0 - (h.c * (x - h.x_bar)).exp() } else { 0.0 };
            assert!((p.v(x) - exact).abs() < 1e-12, "x={x}");
        }
    }

    fn check_flux_and_sandwich(p: &LimitProfiles, lambda: f64) {
        let c = p.c();
        let x_bar = p.header.x_bar;
        let kinks = p.kinks();
        let dx = 1e-4;
        let beta1 = 1f64.min(1.0 / lambda);
        let beta2 = 1f64.max(1.0 / lambda);
        let lo = p.header.x_v - 8.0 / c * lambda.max(1.0);
        let hi = x_bar + 2.0;
        for i in 0..1000 {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / 1000.0;
            if kinks.iter().any(|&k| (x - k).abs() < 3.0 * dx) {
                continue;
            }
            let expected = if x < x_bar { c } else { 0.0 };
            let flux = p.flux(x, dx);
            assert!((flux - expected).abs() < 1e-7, "x={x}: flux {flux} vs {expected}");
            let (u, v, liq) = (p.u(x), p.v(x), p.liquid(x));
            assert!(beta1 * (1.0 - u) - liq - 1e-7 <= v && v <= beta2 * (1.0 - u) + 1e-7, "x={x}");
        }
    }

    #[test]
    fn spray_limit_profiles_satisfy_flux_and_sandwich() {
        for &(delta, m_u, n0, lambda) in &[
            (0.0, 4.0, 0.1, 1.0),
            (0.0, 0.2, 2.0, 1.0),
            (1.0 / 3.0, 1.0, 0.4, 1.0),
            (1.0 / 3.0, 1.0, 0.4, 2.0),
            (1.0 / 3.0, 0.1, 3.0, 0.5),
        ] {
            let l = laws(delta, 1.0, INV_E);
            let cfg = mono(m_u, n0, lambda);
            let h = limit_speed_and_regime(&l, &cfg).unwrap();
            let p = limit_profiles(&h, &l, &cfg).unwrap();
            check_flux_and_sandwich(&p, lambda);
            assert!((p.v(-200.0) - cfg.v_u()).abs() < 1e-12);
            assert_eq!(p.m(0, -200.0), m_u);
        }
    }

    #[test]
    fn instantaneous_profiles_behave() {
        let l = Laws::new(ReactionLaw::arrhenius(0.5, 0.05).unwrap(), VaporisationLaw::instantaneous(0.3).unwrap())
            .unwrap();
        let cfg = mono(0.5, 1.0, 1.0);
        let p = instantaneous_profiles(&l, &cfg).unwrap();
        assert_eq!(p.header.regime, Regime::DiffusionLimited);
        assert!((p.c() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.header.x_vf, Some(p.header.x_v));
        check_flux_and_sandwich(&p, 1.0);
        // Jump of Lambda v' at onset equals -c n0 m_u.
        let dx = 1e-6;
        let x_v = p.header.x_v;
        let left = (p.v(x_v - dx) - p.v(x_v - 2.0 * dx)) / dx;
        let right = (p.v(x_v + 2.0 * dx) - p.v(x_v + dx)) / dx;
        assert!((right - left + p.c() * 0.5).abs() < 1e-4);
        // Vanishing load recovers the gaseous profile.
        let light = mono(1e-12, 1.0, 1.0);
        let q = instantaneous_profiles(&l, &light).unwrap();
        let gas = FlameConfig::gaseous(1.0).unwrap();
        let g = limit_profiles(&limit_speed_and_regime(&l, &gas).unwrap(), &l, &gas).unwrap();
        for x in [-3.0, -1.0, 0.0, 0.4] {
            assert!((q.v(x) - g.v(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn power_law_closed_form_properties() {
        let law = VaporisationLaw::power_law(0.3, 1.0, 1.0 / 3.0).unwrap();
        let p = PowerLawClosedForm::new(1.0, &law, 1.0, -2.0).unwrap();
        assert!((p.overlap_exponent() - 0.4).abs() < 1e-15);
        assert!((p.x_vf - (-2.0 + 1.5)).abs() < 1e-15);
        // M' = -m by quadrature of the closed form.
        let x = -1.0;
        let num = adaptive_simpson(&|s: f64| p.m(s), x, p.x_vf, 1e-14);
        assert!((p.big_m(x) - num).abs() < 1e-12);
        let zero = VaporisationLaw::power_law(0.3, 2.0, 0.0).unwrap();
        let q = PowerLawClosedForm::new(1.5, &zero, 0.8, 0.0).unwrap();
        assert!((q.m(0.1) - (0.8 - 2.0 / 1.5 * 0.1)).abs() < 1e-14);
        assert!((overlap_exponent(0.0) - 0.5).abs() < 1e-15);
        let scaled = VaporisationLaw::power_law(0.3, 6.0, 1.0 / 3.0).unwrap();
        let r = PowerLawClosedForm::new(6.0, &scaled, 1.0, -2.0).unwrap();
        for s in [-1.9, -1.5, -0.7] {
            assert!((r.m(s) - p.m(s)).abs() < 1e-14);
        }
    }

    #[test]
    fn tabulated_front_agrees_with_equivalent_power_law() {
        use crate::model::VaporisationTable;
        // Constant rate g0 = 1 is the delta = 0 power law.
        let table = VaporisationTable {
            temps: vec![INV_E, 1.0],
            masses: vec![0.01, 5.0],
            rates: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        };
        let tab =
            Laws::new(ReactionLaw::arrhenius(0.5, 0.05).unwrap(), VaporisationLaw::tabulated(table).unwrap()).unwrap();
        let pow = laws(0.0, 1.0, INV_E);
        for c in [0.3, 1.0, 2.0] {
            let a = vaporisation_front_of_speed(c, 0.7, &tab).unwrap();
            let b = vaporisation_front_of_speed(c, 0.7, &pow).unwrap();
            assert!((a.x_vf - b.x_vf).abs() < 1e-10, "c={c}");
            assert_eq!(a.infeasible, b.infeasible);
        }
        assert!((c_star(4.0, &tab).unwrap() - 0.5).abs() < 1e-8);
    }

    proptest! {
        #[test]
        fn front_gap_increases_with_speed(delta in 0.0f64..0.9, m in 0.01f64..3.0, c1 in 0.05f64..5.0, dc in 0.01f64..2.0) {
            let l = laws(delta, 1.0, 0.3);
            let a = vaporisation_front_of_speed(c1, m, &l).unwrap();
            let b = vaporisation_front_of_speed(c1 + dc, m, &l).unwrap();
            prop_assert!(b.x_vf > a.x_vf);
            prop_assert!(front_gap(c1 + dc, m, &l).unwrap() > front_gap(c1, m, &l).unwrap());
        }

        #[test]
        fn c_star_nonincreasing_in_mass(delta in 0.0f64..0.9, m in 0.001f64..1.0, f in 1.0f64..10.0) {
            let l = laws(delta, 1.0, 0.3);
            prop_assert!(c_star(m * f, &l).unwrap() <= c_star(m, &l).unwrap() * (1.0 + 1e-12));
        }

        #[test]
        fn heuristic_agrees_with_min_rule(delta in 0.0f64..0.9, m in 0.01f64..5.0, lambda in 0.3f64..3.0) {
            let l = laws(delta, 1.0, 0.3);
            let cfg = FlameConfig::monodisperse(lambda, 0.1 / m, m).unwrap();
            let full = limit_speed_and_regime(&l, &cfg).unwrap();
            let (regime, _) = heuristic_regime_test(&l, &cfg).unwrap();
            prop_assert_eq!(regime, full.regime);
            prop_assert!(full.c <= full.c_gas);
            prop_assert_eq!(full.c == full.c_gas, full.regime == Regime::DiffusionLimited);
        }
    }

    #[test]
    fn c_star_blows_up_for_small_mass() {
        let l = laws(1.0 / 3.0, 1.0, 0.3);
        let speeds: Vec<f64> = [1e-3, 1e-2, 1e-1, 1.0].iter().map(|&m| c_star(m, &l).unwrap()).collect();
        assert!(speeds.windows(2).all(|w| w[0] > w[1]));
        assert!(speeds[0] > 5.0 * speeds[3]);
    }
}
