//! Reaction and vaporisation laws, flame configurations, and the conversion
//! from dimensional unburnt states to normalized parameters.
//!
//! Every law is validated on construction against the structural hypotheses
//! the rest of the crate relies on: an ignition cutoff for the reaction rate,
//! an onset temperature for vaporisation below the ignition temperature, and a
//! finite time for complete vaporisation above the onset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// Smallest vaporisation rate accepted while integrating `dM / phi`.
const MIN_VAPORISATION_RATE: f64 = 1e-300;
const VAPORISATION_TIME_RTOL: f64 = 1e-10;
const CLOSURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReactionKind {
    /// `f(u) = eps^-2 exp((u - 1) / eps)` above the ignition temperature.
    ArrheniusCutoff { epsilon: f64 },
    /// Piecewise-linear interpolation of `(u, f)` samples covering `[theta_i, 1]`.
    TabulatedLipschitz { table: Vec<(f64, f64)> },
}

/// Ignition-cutoff reaction rate `f(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionLaw {
    theta_i: f64,
    kind: ReactionKind,
}

impl ReactionLaw {
    pub fn arrhenius(theta_i: f64, epsilon: f64) -> Result<Self> {
        check_open_unit("theta_i", theta_i)?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidLaw(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { theta_i, kind: ReactionKind::ArrheniusCutoff { epsilon } })
    }

    pub fn tabulated(theta_i: f64, table: Vec<(f64, f64)>) -> Result<Self> {
        check_open_unit("theta_i", theta_i)?;
        if table.len() < 2 {
            return Err(Error::InvalidLaw("reaction table needs at least two samples".into()));
        }
        if table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidLaw("reaction table abscissae must increase strictly".into()));
        }
        let (u_first, _) = table[0];
        let (u_last, _) = table[table.len() - 1];
        if (u_first - theta_i).abs() > 1e-12 || (u_last - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!(
                "reaction table must span [theta_i, 1] = [{theta_i}, 1], got [{u_first}, {u_last}]"
            )));
        }
        // Positive on (theta_i, 1]; the sample at theta_i itself may be zero.
        if table.iter().any(|&(_, f)| !(f.is_finite() && f >= 0.0)) || table[1..].iter().any(|&(_, f)| f <= 0.0) {
            return Err(Error::InvalidLaw("reaction rate must be positive on (theta_i, 1]".into()));
        }
        Ok(Self { theta_i, kind: ReactionKind::TabulatedLipschitz { table } })
    }

    pub fn theta_i(&self) -> f64 {
        self.theta_i
    }

    pub fn kind(&self) -> &ReactionKind {
        &self.kind
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => Some(epsilon),
            ReactionKind::TabulatedLipschitz { .. } => None,
        }
    }

    /// Same law family with a different inverse activation temperature.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        match self.kind {
            ReactionKind::ArrheniusCutoff { .. } => Self::arrhenius(self.theta_i, epsilon),
            ReactionKind::TabulatedLipschitz { .. } => {
                Err(Error::InvalidLaw("epsilon continuation needs an Arrhenius reaction law".into()))
            }
        }
    }

    /// Reaction rate at normalized temperature `u`.
    pub fn rate(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("temperature {u} outside [0, 1]")));
        }
        Ok(self.rate_extended(u))
    }

    /// Rate without the domain check. Above `u = 1` the Arrhenius formula is
    /// continued analytically and tables are held flat; Newton iterates may
    /// leave `[0, 1]` transiently.
    pub(crate) fn rate_extended(&self, u: f64) -> f64 {
        if u <= self.theta_i {
            return 0.0;
        }
        match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => ((u - 1.0) / epsilon).exp() / (epsilon * epsilon),
            ReactionKind::TabulatedLipschitz { table } => interp_table(table, u),
        }
    }

    /// The law continued across the cutoff: the Arrhenius formula for all
    /// `u`, tables held at their first sample below `theta_i`.
    pub(crate) fn rate_uncut(&self, u: f64) -> f64 {
        match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => ((u - 1.0) / epsilon).exp() / (epsilon * epsilon),
            ReactionKind::TabulatedLipschitz { table } => interp_table(table, u),
        }
    }

    pub(crate) fn rate_uncut_derivative(&self, u: f64) -> f64 {
        match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => ((u - 1.0) / epsilon).exp() / (epsilon * epsilon * epsilon),
            ReactionKind::TabulatedLipschitz { .. } => {
                self.rate_derivative_extended(u.max(self.theta_i + f64::EPSILON))
            }
        }
    }

    /// d f / d u, one-sided at table breakpoints.
    pub(crate) fn rate_derivative_extended(&self, u: f64) -> f64 {
        if u <= self.theta_i {
            return 0.0;
        }
        match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => ((u - 1.0) / epsilon).exp() / (epsilon * epsilon * epsilon),
            ReactionKind::TabulatedLipschitz { table } => {
                if u >= 1.0 {
                    return 0.0;
                }
                let i = table.partition_point(|&(x, _)| x <= u).clamp(1, table.len() - 1);
                let (x0, f0) = table[i - 1];
                let (x1, f1) = table[i];
                (f1 - f0) / (x1 - x0)
            }
        }
    }

    /// Supremum of `f` over `[0, 1]`.
    pub fn sup(&self) -> f64 {
        match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => 1.0 / (epsilon * epsilon),
            ReactionKind::TabulatedLipschitz { table } => table.iter().map(|&(_, f)| f).fold(0.0, f64::max),
        }
    }

    /// `G(s) = int_{theta_i}^{s} f(x) (1 - x) dx`.
    pub fn integral(&self, s: f64) -> Result<f64> {
        if !(self.theta_i..=1.0).contains(&s) {
            return Err(Error::Domain(format!("upper limit {s} outside [theta_i, 1] = [{}, 1]", self.theta_i)));
        }
        Ok(match &self.kind {
            ReactionKind::ArrheniusCutoff { epsilon } => arrhenius_integral(self.theta_i, *epsilon, s),
            ReactionKind::TabulatedLipschitz { table } => {
                // Piecewise quadratic integrand: integrate breakpoint to breakpoint.
                let mut total = 0.0;
                let mut lo = self.theta_i;
                for &(x, _) in table.iter().skip(1) {
                    let hi = x.min(s);
                    if hi > lo {
                        let g = |t: f64| interp_table(table, t) * (1.0 - t);
                        let scale = self.sup().max(1.0) * (hi - lo);
                        total += adaptive_simpson(&g, lo, hi, 1e-13 * scale);
                    }
                    if x >= s {
                        break;
                    }
                    lo = x;
                }
                total
            }
        })
    }

    /// Total reaction amount in the high-activation-energy limit.
    ///
    /// For the Arrhenius family this is the vanishing-`epsilon` limit of
    /// `G(1)`; a tabulated law has no such family and reports its own `G(1)`.
    pub fn mu(&self) -> f64 {
        match self.kind {
            ReactionKind::ArrheniusCutoff { .. } => mu_limit(self.theta_i).expect("theta_i validated at construction"),
            ReactionKind::TabulatedLipschitz { .. } => self.integral(1.0).expect("1 lies in [theta_i, 1]"),
        }
    }
}

/// Closed form of `G(s)` for the Arrhenius law: with `t = (1 - x) / eps` the
/// integrand becomes `t e^{-t}`.
fn arrhenius_integral(theta_i: f64, epsilon: f64, s: f64) -> f64 {
    let t_hi = (1.0 - theta_i) / epsilon;
    let t_lo = (1.0 - s) / epsilon;
    (1.0 + t_lo) * (-t_lo).exp() - (1.0 + t_hi) * (-t_hi).exp()
}

/// Vanishing-`epsilon` limit of `G_eps(1)` for the Arrhenius cutoff family,
/// by Richardson extrapolation along a halving ladder of `epsilon`.
pub fn mu_limit(theta_i: f64) -> Result<f64> {
    check_open_unit("theta_i", theta_i)?;
    let base = (1.0 - theta_i) / 10.0;
    let ladder: Vec<f64> = (0..8).map(|k| arrhenius_integral(theta_i, base / f64::powi(2.0, k), 1.0)).collect();
    // First-order Richardson: error assumed proportional to epsilon.
    let extrapolated: Vec<f64> = ladder.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    Ok(*extrapolated.last().expect("ladder has eight rungs"))
}

fn interp_table(table: &[(f64, f64)], u: f64) -> f64 {
    let (x_first, f_first) = table[0];
    let (x_last, f_last) = table[table.len() - 1];
    if u <= x_first {
        return f_first;
    }
    if u >= x_last {
        return f_last;
    }
    let i = table.partition_point(|&(x, _)| x <= u);
    let (x0, f0) = table[i - 1];
    let (x1, f1) = table[i];
    f0 + (f1 - f0) * (u - x0) / (x1 - x0)
}

/// Bilinear table for `phi(u, m)` on `temps x masses`, row-major in temperature.
///
/// Below the first mass sample the rate is held at its value there, so a
/// droplet keeps vaporising at a finite rate until it is gone; `phi(u, 0)` is
/// zero by definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaporisationTable {
    pub temps: Vec<f64>,
    pub masses: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
}

impl VaporisationTable {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidLaw(format!("vaporisation table: {msg}")));
        if self.temps.len() < 2 || self.masses.is_empty() {
            return bad("need at least two temperatures and one mass");
        }
        if self.temps.windows(2).any(|w| !(w[1] > w[0])) || self.masses.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sample axes must increase strictly");
        }
        if (self.temps[self.temps.len() - 1] - 1.0).abs() > 1e-12 {
            return bad("temperatures must end at 1");
        }
        if !(self.masses[0] > 0.0) {
            return bad("first mass sample must be positive");
        }
        if self.rates.len() != self.temps.len() || self.rates.iter().any(|row| row.len() != self.masses.len()) {
            return bad("rate grid shape does not match the axes");
        }
        if self.rates.iter().flatten().any(|&r| !(r.is_finite() && r > 0.0)) {
            return bad("rates must be positive and finite");
        }
        for j in 0..self.masses.len() {
            if self.rates.windows(2).any(|w| w[1][j] < w[0][j]) {
                return bad("rates must be nondecreasing in temperature");
            }
        }
        Ok(())
    }

    fn eval(&self, u: f64, m: f64) -> f64 {
        let (iu, tu) = bracket(&self.temps, u);
        let (im, tm) = bracket(&self.masses, m);
        let r = |i: usize, j: usize| self.rates[i][j];
        let iu1 = (iu + 1).min(self.temps.len() - 1);
        let im1 = (im + 1).min(self.masses.len() - 1);
        let lo = r(iu, im) + (r(iu, im1) - r(iu, im)) * tm;
        let hi = r(iu1, im) + (r(iu1, im1) - r(iu1, im)) * tm;
        lo + (hi - lo) * tu
    }
}

/// Index of the left sample and the interpolation weight, flat outside.
fn bracket(axis: &[f64], x: f64) -> (usize, f64) {
    if x <= axis[0] || axis.len() == 1 {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if x >= axis[last] {
        return (last, 0.0);
    }
    let i = axis.partition_point(|&a| a <= x) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VaporisationKind {
    /// `phi(u, m) = g0 m^delta` for `u >= theta_v`.
    PowerLaw {
        g0: f64,
        delta: f64,
    },
    /// Droplets vanish at the first point where `u` reaches `theta_v`.
    InstantaneousDirac,
    TabulatedLipschitz {
        table: VaporisationTable,
    },
}

/// Vaporisation rate `phi(u, m)` with onset temperature `theta_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaporisationLaw {
    theta_v: f64,
    kind: VaporisationKind,
}

impl VaporisationLaw {
    pub fn power_law(theta_v: f64, g0: f64, delta: f64) -> Result<Self> {
        check_open_unit("theta_v", theta_v)?;
        if !(g0.is_finite() && g0 > 0.0) {
            return Err(Error::InvalidLaw(format!("g0 must be positive, got {g0}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidLaw(format!(
                "delta must lie in [0, 1) for finite-time vaporisation, got {delta}"
            )));
        }
        Ok(Self { theta_v, kind: VaporisationKind::PowerLaw { g0, delta } })
    }

    pub fn instantaneous(theta_v: f64) -> Result<Self> {
        check_open_unit("theta_v", theta_v)?;
        Ok(Self { theta_v, kind: VaporisationKind::InstantaneousDirac })
    }

    /// The onset temperature is the first temperature sample.
    pub fn tabulated(table: VaporisationTable) -> Result<Self> {
        table.validate()?;
        let theta_v = table.temps[0];
        check_open_unit("theta_v", theta_v)?;
        Ok(Self { theta_v, kind: VaporisationKind::TabulatedLipschitz { table } })
    }

    pub fn theta_v(&self) -> f64 {
        self.theta_v
    }

    pub fn kind(&self) -> &VaporisationKind {
        &self.kind
    }

    pub fn is_instantaneous(&self) -> bool {
        matches!(self.kind, VaporisationKind::InstantaneousDirac)
    }

    /// `phi(u, m)`. The instantaneous law has no finite rate above onset and
    /// reports `+inf` there.
    pub fn rate(&self, u: f64, m: f64) -> f64 {
        if u < self.theta_v || m <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            VaporisationKind::PowerLaw { g0, delta } => g0 * m.powf(*delta),
            VaporisationKind::InstantaneousDirac => f64::INFINITY,
            VaporisationKind::TabulatedLipschitz { table } => table.eval(u, m),
        }
    }

    /// Time `tau(theta, m)` for a droplet of mass `m` held at `theta` to vanish.
    pub fn vaporisation_time(&self, theta: f64, m: f64) -> Result<f64> {
        if theta <= self.theta_v {
            return Err(Error::InfiniteVaporisationTime { theta, theta_v: self.theta_v });
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(Error::Domain(format!("droplet mass {m} must be nonnegative")));
        }
        if m == 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            VaporisationKind::PowerLaw { g0, delta } => Ok(m.powf(1.0 - delta) / ((1.0 - delta) * g0)),
            VaporisationKind::InstantaneousDirac => Ok(0.0),
            VaporisationKind::TabulatedLipschitz { table } => {
                // Rough magnitude for the relative tolerance.
                let scale = m / table.eval(theta, m).max(MIN_VAPORISATION_RATE);
                let floor_hit = std::cell::Cell::new(false);
                let guarded = |mass: f64| {
                    let r = table.eval(theta, mass);
                    if r < MIN_VAPORISATION_RATE {
                        floor_hit.set(true);
                    }
                    1.0 / r.max(MIN_VAPORISATION_RATE)
                };
                let mut total = 0.0;
                let mut lo = 0.0;
                for &b in table.masses.iter().chain(std::iter::once(&m)) {
                    let hi = b.min(m);
                    if hi > lo {
                        total += adaptive_simpson(&guarded, lo, hi, VAPORISATION_TIME_RTOL * scale);
                        lo = hi;
                    }
                }
                if floor_hit.get() {
                    return Err(Error::InfiniteVaporisationTime { theta, theta_v: self.theta_v });
                }
                Ok(total)
            }
        }
    }

    /// Variable in which the mass equation is integrated: `m^(1 - delta)` for
    /// power laws (whose rate is then constant above onset), `m` otherwise.
    pub(crate) fn to_march(&self, m: f64) -> f64 {
        match self.kind {
            VaporisationKind::PowerLaw { delta, .. } if delta > 0.0 => m.max(0.0).powf(1.0 - delta),
            _ => m,
        }
    }

    pub(crate) fn mass_from_march(&self, w: f64) -> f64 {
        match self.kind {
            VaporisationKind::PowerLaw { delta, .. } if delta > 0.0 => w.max(0.0).powf(1.0 / (1.0 - delta)),
            _ => w.max(0.0),
        }
    }

    /// Time derivative of the march variable at temperature `u` (at or above
    /// onset). Defined for `w <= 0` by continuation so that a front can be
    /// located inside a step.
    pub(crate) fn march_rate(&self, u: f64, w: f64) -> f64 {
        match &self.kind {
            VaporisationKind::PowerLaw { g0, delta } => -(1.0 - delta) * g0,
            VaporisationKind::InstantaneousDirac => f64::NEG_INFINITY,
            VaporisationKind::TabulatedLipschitz { table } => -table.eval(u.min(1.0), w.max(table.masses[0])),
        }
    }
}

/// One droplet class: number density and initial droplet mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletBin {
    pub n0: f64,
    pub m_u: f64,
}

/// Normalized travelling-wave parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlameConfig {
    lambda: f64,
    v_u: f64,
    bins: Vec<DropletBin>,
}

impl FlameConfig {
    pub fn new(lambda: f64, v_u: f64, bins: Vec<DropletBin>) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("reciprocal Lewis number must be positive, got {lambda}")));
        }
        if !(v_u.is_finite() && v_u >= 0.0) {
            return Err(Error::InvalidConfig(format!("v_u must be nonnegative, got {v_u}")));
        }
        for (j, b) in bins.iter().enumerate() {
            if !(b.n0.is_finite() && b.n0 >= 0.0 && b.m_u.is_finite() && b.m_u >= 0.0) {
                return Err(Error::InvalidConfig(format!("bin {j}: n0 and m_u must be nonnegative")));
            }
        }
        let total = v_u + bins.iter().map(|b| b.n0 * b.m_u).sum::<f64>();
        if (total - 1.0).abs() > CLOSURE_TOL {
            return Err(Error::Closure { total });
        }
        Ok(Self { lambda, v_u, bins })
    }

    pub fn gaseous(lambda: f64) -> Result<Self> {
        Self::new(lambda, 1.0, Vec::new())
    }

    /// `v_u` is set from the closure `v_u + n0 m_u = 1`.
    pub fn monodisperse(lambda: f64, n0: f64, m_u: f64) -> Result<Self> {
        Self::new(lambda, 1.0 - n0 * m_u, vec![DropletBin { n0, m_u }])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn v_u(&self) -> f64 {
        self.v_u
    }

    pub fn bins(&self) -> &[DropletBin] {
        &self.bins
    }

    /// Bins that actually carry liquid.
    pub fn active_bins(&self) -> impl Iterator<Item = &DropletBin> {
        self.bins.iter().filter(|b| b.n0 > 0.0 && b.m_u > 0.0)
    }

    pub fn liquid_load(&self) -> f64 {
        self.bins.iter().map(|b| b.n0 * b.m_u).sum()
    }

    pub fn is_gaseous(&self) -> bool {
        self.active_bins().next().is_none()
    }

    /// Largest initial droplet mass over loaded bins (0 for a pure gas).
    pub fn max_droplet_mass(&self) -> f64 {
        self.active_bins().map(|b| b.m_u).fold(0.0, f64::max)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.v_u, self.bins.clone())
    }
}

/// Reaction and vaporisation laws attached to one flame, with
/// `theta_v < theta_i < 1` checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Laws {
    pub reaction: ReactionLaw,
    pub vaporisation: VaporisationLaw,
}

impl Laws {
    pub fn new(reaction: ReactionLaw, vaporisation: VaporisationLaw) -> Result<Self> {
        if !(vaporisation.theta_v() < reaction.theta_i()) {
            return Err(Error::InvalidLaw(format!(
                "vaporisation onset theta_v = {} must lie below ignition theta_i = {}",
                vaporisation.theta_v(),
                reaction.theta_i()
            )));
        }
        Ok(Self { reaction, vaporisation })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.reaction.with_epsilon(epsilon)?, self.vaporisation.clone())
    }
}

/// Dimensional unburnt state and thermochemical constants (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInput {
    pub t_u: f64,
    pub y_u: f64,
    pub n_u: f64,
    pub m_u: f64,
    pub rho_0: f64,
    pub q: f64,
    pub c_p: f64,
    pub mu_mol: f64,
}

/// Output of [`normalize_physical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedMixture {
    pub n0: f64,
    pub v_u: f64,
    pub m_u: f64,
    /// `Q / (c_p mu) * (Y_u + n_0 M_u / rho_0)`, the adiabatic temperature rise.
    pub temperature_rise: f64,
    /// Burnt-gas temperature `T_u + temperature_rise`.
    pub t_b: f64,
    pub t_u: f64,
}

impl NormalizedMixture {
    pub fn config(&self, lambda: f64) -> Result<FlameConfig> {
        let bins = if self.n0 > 0.0 { vec![DropletBin { n0: self.n0, m_u: self.m_u }] } else { Vec::new() };
        FlameConfig::new(lambda, self.v_u, bins)
    }

    /// `u = (T - T_u) / (T_b - T_u)`.
    pub fn normalized_temperature(&self, t: f64) -> f64 {
        (t - self.t_u) / (self.t_b - self.t_u)
    }
}

pub fn normalize_physical(p: &PhysicalInput) -> Result<NormalizedMixture> {
    for (name, value) in
        [("T_u", p.t_u), ("Y_u", p.y_u), ("rho_0", p.rho_0), ("Q", p.q), ("c_p", p.c_p), ("mu_mol", p.mu_mol)]
    {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {value}")));
        }
    }
    if !(p.n_u.is_finite() && p.n_u >= 0.0 && p.m_u.is_finite() && p.m_u >= 0.0) {
        return Err(Error::Domain("n_u and M_u must be nonnegative".into()));
    }
    let gas = p.rho_0 * p.y_u;
    let liquid = p.n_u * p.m_u;
    let total = gas + liquid;
    if !(total > 0.0) {
        return Err(Error::DegenerateMixture);
    }
    let m_u = p.m_u / total;
    let load = p.n_u * m_u;
    // v_u from the closure keeps v_u + n0 m_u = 1 to the last bit.
    let v_u = 1.0 - load;
    let temperature_rise = p.q / (p.c_p * p.mu_mol) * (p.y_u + p.n_u * p.m_u / p.rho_0);
    Ok(NormalizedMixture { n0: p.n_u, v_u, m_u, temperature_rise, t_b: p.t_u + temperature_rise, t_u: p.t_u })
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLaw(format!("{name} must lie in (0, 1), got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn arrhenius_rate_examples() {
        let law = ReactionLaw::arrhenius(0.5, 1.0).unwrap();
        assert_eq!(law.rate(1.0).unwrap(), 1.0);
        let law = ReactionLaw::arrhenius(0.5, 0.5).unwrap();
        assert_eq!(law.rate(0.4).unwrap(), 0.0);
        assert_eq!(law.rate(1.0).unwrap(), 4.0);
        assert!(matches!(law.rate(1.2), Err(Error::Domain(_))));
        assert!(matches!(law.rate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn reaction_integral_examples() {
        // Closed form 1 - e^{-D}(1 + D), cross-checked by quadrature.
        for (eps, expected) in [(0.05, 1.0 - 11.0 * (-10f64).exp()), (0.5, 1.0 - 2.0 / 1f64.exp())] {
            let law = ReactionLaw::arrhenius(0.5, eps).unwrap();
            let g = law.integral(1.0).unwrap();
            let quad = adaptive_simpson(&|s: f64| law.rate_extended(s) * (1.0 - s), 0.5, 1.0, 1e-14);
            assert!(close(g, expected, 1e-14), "{g} vs {expected}");
            assert!(close(g, quad, 1e-10 * g), "{g} vs quadrature {quad}");
        }
        assert!(close(ReactionLaw::arrhenius(0.5, 0.05).unwrap().integral(1.0).unwrap(), 0.99950, 5e-6));
        assert!(close(ReactionLaw::arrhenius(0.5, 0.5).unwrap().integral(1.0).unwrap(), 0.26424, 5e-6));
        assert_eq!(ReactionLaw::arrhenius(0.5, 0.1).unwrap().integral(0.5).unwrap(), 0.0);
        assert!(ReactionLaw::arrhenius(0.5, 0.1).unwrap().integral(0.4).is_err());
    }

    #[test]
    fn tabulated_reaction_integral_matches_exact_piecewise_quadratic() {
        let law = ReactionLaw::tabulated(0.5, vec![(0.5, 0.0), (0.75, 2.0), (1.0, 2.0)]).unwrap();
        // int_{0.5}^{0.75} 8(s-0.5)(1-s) ds + int_{0.75}^{1} 2(1-s) ds
        let first = 8.0 * (0.25f64.powi(2) / 2.0 * 0.5 - 0.25f64.powi(3) / 3.0);
        let second = 0.25f64.powi(2);
        assert!(close(law.integral(1.0).unwrap(), first + second, 1e-12));
        assert_eq!(law.integral(0.5).unwrap(), 0.0);
        assert_eq!(law.rate(0.5).unwrap(), 0.0);
        assert_eq!(law.sup(), 2.0);
    }

    #[test]
    fn tabulated_reaction_rejects_bad_tables() {
        assert!(ReactionLaw::tabulated(0.5, vec![(0.5, 1.0)]).is_err());
        assert!(ReactionLaw::tabulated(0.5, vec![(0.4, 1.0), (1.0, 1.0)]).is_err());
        assert!(ReactionLaw::tabulated(0.5, vec![(0.5, 1.0), (0.9, 0.0), (1.0, 1.0)]).is_err());
        assert!(ReactionLaw::tabulated(0.5, vec![(0.5, 1.0), (0.5, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn mu_limit_is_one_for_arrhenius() {
        for theta_i in [0.5, 0.9, 0.99] {
            let mu = mu_limit(theta_i).unwrap();
            assert!(close(mu, 1.0, 1e-12), "theta_i={theta_i}: {mu}");
        }
        // Oracle: direct quadrature at small epsilon.
        let law = ReactionLaw::arrhenius(0.5, 1e-3).unwrap();
        let knots = [0.5, 0.9, 0.98, 0.99, 0.995, 0.998, 0.999, 1.0];
        let quad: f64 = knots
            .windows(2)
            .map(|w| adaptive_simpson(&|s: f64| law.rate_extended(s) * (1.0 - s), w[0], w[1], 1e-13))
            .sum();
        assert!(close(quad, 1.0, 1e-9));
        // At theta_i = 0.99, epsilon = 0.1 the integral is far from its limit.
        let g = ReactionLaw::arrhenius(0.99, 0.1).unwrap().integral(1.0).unwrap();
        assert!(close(g, 1.0 - 1.1 * (-0.1f64).exp(), 1e-15));
    }

    #[test]
    fn vaporisation_time_examples() {
        let law = VaporisationLaw::power_law(0.25, 1.0, 0.0).unwrap();
        assert!(close(law.vaporisation_time(0.5, 0.4).unwrap(), 0.4, 1e-15));
        let law = VaporisationLaw::power_law(0.25, 1.0, 1.0 / 3.0).unwrap();
        assert!(close(law.vaporisation_time(0.5, 1.0).unwrap(), 1.5, 1e-14));
        let law = VaporisationLaw::power_law(0.25, 2.0, 0.5).unwrap();
        assert!(close(law.vaporisation_time(0.5, 1.0).unwrap(), 1.0, 1e-15));
        assert!(matches!(law.vaporisation_time(0.25, 1.0), Err(Error::InfiniteVaporisationTime { .. })));
        assert!(VaporisationLaw::power_law(0.25, 1.0, 1.0).is_err());
    }

    #[test]
    fn vaporisation_rate_cutoffs() {
        let law = VaporisationLaw::power_law(0.3, 2.0, 1.0 / 3.0).unwrap();
        assert_eq!(law.rate(0.29, 0.5), 0.0);
        assert_eq!(law.rate(0.9, 0.0), 0.0);
        assert!(close(law.rate(0.9, 0.125), 1.0, 1e-15));
        let dirac = VaporisationLaw::instantaneous(0.3).unwrap();
        assert_eq!(dirac.rate(0.2, 0.5), 0.0);
        assert_eq!(dirac.rate(0.5, 0.5), f64::INFINITY);
        assert_eq!(dirac.vaporisation_time(0.5, 0.5).unwrap(), 0.0);
    }

    fn sample_table() -> VaporisationTable {
        VaporisationTable {
            temps: vec![0.2, 0.6, 1.0],
            masses: vec![0.1, 1.0],
            rates: vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![2.0, 4.0]],
        }
    }

    #[test]
    fn tabulated_vaporisation_time_matches_hand_integral() {
        let law = VaporisationLaw::tabulated(sample_table()).unwrap();
        assert_eq!(law.theta_v(), 0.2);
        // At u = 0.6: phi = 2 on (0, 0.1], then 2 + (m - 0.1)/0.9 up to m = 1.
        let t = law.vaporisation_time(0.6, 1.0).unwrap();
        let expected = 0.1 / 2.0 + 0.9 * (3.0f64 / 2.0).ln();
        assert!(close(t, expected, 1e-10 * expected), "{t} vs {expected}");
        assert!(law.vaporisation_time(0.2, 1.0).is_err());
    }

    #[test]
    fn tabulated_vaporisation_rejects_decreasing_in_temperature() {
        let mut table = sample_table();
        table.rates[2][0] = 0.5;
        assert!(VaporisationLaw::tabulated(table).is_err());
    }

    #[test]
    fn config_closure_and_ordering() {
        assert!(FlameConfig::new(1.0, 0.6, vec![DropletBin { n0: 1.0, m_u: 0.4 }]).is_ok());
        assert!(matches!(
            FlameConfig::new(1.0, 0.7, vec![DropletBin { n0: 1.0, m_u: 0.4 }]),
            Err(Error::Closure { .. })
        ));
        assert!(FlameConfig::new(0.0, 1.0, vec![]).is_err());
        let reaction = ReactionLaw::arrhenius(0.5, 0.1).unwrap();
        assert!(Laws::new(reaction.clone(), VaporisationLaw::power_law(0.5, 1.0, 0.0).unwrap()).is_err());
        assert!(Laws::new(reaction, VaporisationLaw::power_law(0.3, 1.0, 0.0).unwrap()).is_ok());
    }

    fn physical(n_u: f64, m_u: f64) -> PhysicalInput {
        PhysicalInput { t_u: 300.0, y_u: 0.6, n_u, m_u, rho_0: 1.0, q: 4e7, c_p: 1200.0, mu_mol: 0.1 }
    }

    #[test]
    fn normalize_physical_examples() {
        let gas = normalize_physical(&physical(0.0, 0.3)).unwrap();
        assert_eq!(gas.v_u, 1.0);
        assert!(close(gas.temperature_rise, 4e7 * 0.6 / (1200.0 * 0.1), 1e-9));
        assert!(gas.config(1.0).unwrap().is_gaseous());

        let sym = normalize_physical(&physical(1.5, 0.4)).unwrap();
        assert!(close(sym.v_u, 0.5, 1e-15) && close(sym.n0 * sym.m_u, 0.5, 1e-15));

        let fig = normalize_physical(&physical(1.0, 0.4)).unwrap();
        assert!(close(fig.v_u, 0.6, 1e-15) && close(fig.m_u, 0.4, 1e-15));
        assert!(close(fig.normalized_temperature(fig.t_b), 1.0, 1e-15));
        assert_eq!(fig.normalized_temperature(300.0), 0.0);

        let mut bad = physical(0.0, 0.0);
        bad.y_u = 0.0;
        assert!(normalize_physical(&bad).is_err());
    }

    proptest! {
        #[test]
        fn rate_is_exactly_zero_below_ignition(theta_i in 0.05f64..0.95, eps in 0.01f64..2.0, frac in 0.0f64..1.0) {
            let law = ReactionLaw::arrhenius(theta_i, eps).unwrap();
            let u = frac * theta_i;
            prop_assert_eq!(law.rate(u).unwrap().to_bits(), 0f64.to_bits());
        }

        #[test]
        fn reaction_integral_monotone_and_bounded(theta_i in 0.05f64..0.95, eps in 0.01f64..2.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let law = ReactionLaw::arrhenius(theta_i, eps).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let s_lo = theta_i + lo * (1.0 - theta_i);
            let s_hi = theta_i + hi * (1.0 - theta_i);
            prop_assert!(law.integral(s_lo).unwrap() <= law.integral(s_hi).unwrap() + 1e-15);
            prop_assert!(law.integral(1.0).unwrap() <= law.sup() * (1.0 - theta_i));
        }

        #[test]
        fn power_law_time_scaling(delta in 0.0f64..0.95, g0 in 0.1f64..10.0, m in 0.01f64..0.5, lam in 0.1f64..2.0) {
            let law = VaporisationLaw::power_law(0.2, g0, delta).unwrap();
            let base = law.vaporisation_time(0.5, m).unwrap();
            let scaled = law.vaporisation_time(0.5, lam * m).unwrap();
            prop_assert!((scaled - lam.powf(1.0 - delta) * base).abs() <= 1e-12 * scaled.max(1.0));
        }

        #[test]
        fn normalized_closure_holds(y_u in 1e-3f64..1.0, n_u in 0.0f64..1e6, m_u in 0.0f64..1e-3, rho in 0.1f64..10.0) {
            let p = PhysicalInput { t_u: 300.0, y_u, n_u, m_u, rho_0: rho, q: 1e7, c_p: 1000.0, mu_mol: 0.03 };
            let out = normalize_physical(&p).unwrap();
            prop_assert!((out.v_u + out.n0 * out.m_u - 1.0).abs() <= 1e-14);
        }
    }
}
