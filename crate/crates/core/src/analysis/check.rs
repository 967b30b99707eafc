//! Machine checks of the qualitative properties every computed wave must have.

use serde::{Deserialize, Serialize};

use crate::hae::LimitProfiles;
use crate::solver::march::first_crossing;
use crate::solver::{fitted_sigma, velocity_bounds, WaveProblem, WaveSolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Largest amount by which the property is violated (0 if it holds
    /// everywhere, negative margins are reported as 0).
    #[serde(with = "crate::io::inf_null")]
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
    /// Abscissa of the worst violation, when it is local.
    pub location: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

/// `tol = max(10 newton_tol, c_h2 h^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckTolerance {
    pub newton_tol: f64,
    pub c_h2: f64,
}

/// Constant in front of `h^2`, calibrated once on the property grid
/// (20 configurations, a = 30, n = 4097, epsilon = 0.1).
pub const DEFAULT_C_H2: f64 = 0.1;

impl Default for CheckTolerance {
    fn default() -> Self {
        Self { newton_tol: 1e-10, c_h2: DEFAULT_C_H2 }
    }
}

impl CheckTolerance {
    pub fn at(&self, h: f64) -> f64 {
        (10.0 * self.newton_tol).max(self.c_h2 * h * h)
    }
}

/// Accumulates the worst violation of a pointwise inequality.
struct Worst {
    value: f64,
    at: Option<f64>,
}

impl Worst {
    fn new() -> Self {
        Self { value: 0.0, at: None }
    }
    /// Records `excess > 0` as a violation at `x`.
    fn see(&mut self, excess: f64, x: f64) {
        if excess.is_nan() {
            self.value = f64::INFINITY;
            self.at = Some(x);
        } else if excess > self.value {
            self.value = excess;
            self.at = Some(x);
        }
    }
}

fn record(name: &str, w: Worst, tol: f64) -> CheckRecord {
    CheckRecord { name: name.into(), worst: w.value, tol, pass: w.value <= tol, location: w.at, note: None }
}

/// Second-order differences: central inside, one-sided at the ends.
pub fn derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        d[k] = (y[k + 1] - y[k - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    d
}

/// Trapezoidal `int f(u) v dx` with `u` linear per cell; cells cut by the
/// ignition temperature are integrated over their ignited part only.
pub fn reaction_integral(problem: &WaveProblem, sol: &WaveSolution) -> f64 {
    let reaction = &problem.laws.reaction;
    let theta = reaction.theta_i();
    let h = sol.h();
    let g = |k: usize| reaction.rate_extended(sol.u[k]) * sol.v[k];
    let mut total = 0.0;
    for k in 0..sol.x.len() - 1 {
        let (u0, u1) = (sol.u[k], sol.u[k + 1]);
        match (u0 > theta, u1 > theta) {
            (true, true) => total += 0.5 * h * (g(k) + g(k + 1)),
            (false, false) => {}
            (a_hot, _) => {
                let s = (theta - u0) / (u1 - u0);
                let v_cut = sol.v[k] + s * (sol.v[k + 1] - sol.v[k]);
                let at_cut = reaction.rate_uncut(theta) * v_cut;
                if a_hot {
                    total += 0.5 * s * h * (g(k) + at_cut);
                } else {
                    total += 0.5 * (1.0 - s) * h * (at_cut + g(k + 1));
                }
            }
        }
    }
    total * sol.tau
}

/// The flux `w = -lambda v' + c v + c sum n0 m` at cell midpoints, in the
/// conservative form of the discrete v equation: consecutive differences are
/// minus the cell reaction source. For instantaneous vaporisation the liquid
/// flux drops with the same hat weights the scheme uses for the mass release.
pub fn discrete_flux(problem: &WaveProblem, sol: &WaveSolution) -> Vec<f64> {
    let cfg = &problem.config;
    let lambda = cfg.lambda();
    let h = sol.h();
    let c = sol.c;
    let n = sol.x.len();
    let (sigma, _) = fitted_sigma(c * h / (2.0 * lambda));
    let vap = &problem.laws.vaporisation;
    let liquid: Vec<f64> = if vap.is_instantaneous() {
        let load = cfg.liquid_load() * sol.tau;
        let mut released = vec![0.0; n];
        if let Some((k, s)) = first_crossing(&sol.u, vap.theta_v()) {
            released[k - 1] = 1.0 - s;
            released[k] = s;
        }
        let mut out = Vec::with_capacity(n - 1);
        let mut left = cfg.liquid_load();
        for r in released.iter().take(n - 1) {
            left -= load * r;
            out.push(c * left);
        }
        out
    } else {
        let total = sol.liquid(cfg);
        (0..n - 1).map(|k| 0.5 * c * (total[k] + total[k + 1])).collect()
    };
    (0..n - 1)
        .map(|k| -lambda * sigma * (sol.v[k + 1] - sol.v[k]) / h + 0.5 * c * (sol.v[k] + sol.v[k + 1]) + liquid[k])
        .collect()
}

/// Evaluates every property on a converged solution. Never stops early.
pub fn check_wave(problem: &WaveProblem, sol: &WaveSolution, tolerance: &CheckTolerance) -> CheckReport {
    let cfg = &problem.config;
    let lambda = cfg.lambda();
    let h = sol.h();
    let tol = tolerance.at(h);
    let n = sol.x.len();
    let c = sol.c;
    let x = &sol.x;
    let liquid = sol.liquid(cfg);
    let load_u: f64 = cfg.bins().iter().map(|b| b.n0 * b.m_u).sum();
    let beta1 = 1f64.min(1.0 / lambda);
    let beta2 = 1f64.max(1.0 / lambda);
    let du = derivative(&sol.u, h);
    let dv = derivative(&sol.v, h);
    let mut records = Vec::new();

    records.push(CheckRecord {
        name: "speed_positive".into(),
        worst: if c > 0.0 { 0.0 } else { -c },
        tol: 0.0,
        pass: c > 0.0 && c.is_finite(),
        location: None,
        note: None,
    });

    let mut w = Worst::new();
    // Far upstream u is below the Newton tolerance, so positivity is only
    // decidable up to tol.
    for (&u, &xk) in sol.u.iter().zip(x) {
        w.see(-u, xk);
        w.see(u - 1.0, xk);
    }
    records.push(record("u_range", w, tol));

    let mut w = Worst::new();
    for (&v, &xk) in sol.v.iter().zip(x) {
        w.see(-v, xk);
        w.see(v - 1.0, xk);
    }
    records.push(record("v_range", w, tol));

    let mut w = Worst::new();
    for (b, m) in cfg.bins().iter().zip(&sol.m) {
        for k in 0..n {
            w.see(-m[k], x[k]);
            w.see(m[k] - b.m_u, x[k]);
        }
    }
    records.push(record("m_range", w, tol));

    let mut w = Worst::new();
    for k in 0..n {
        w.see(-du[k], x[k]);
        w.see(du[k] - c, x[k]);
    }
    records.push(record("u_slope", w, tol));

    let mut w = Worst::new();
    for k in 0..n {
        w.see(-c - lambda * dv[k], x[k]);
        w.see(lambda * dv[k] - c * (1.0 + load_u), x[k]);
    }
    records.push(record("v_slope", w, tol));

    let mut w = Worst::new();
    for m in &sol.m {
        let dm = derivative(m, h);
        for k in 0..n {
            w.see(dm[k], x[k]);
        }
    }
    records.push(record("m_slope", w, tol));

    let mut w = Worst::new();
    for k in 0..n {
        let u = sol.u[k];
        w.see(beta1 * (1.0 - u) - liquid[k] - sol.v[k], x[k]);
        w.see(sol.v[k] - beta2 * (1.0 - u), x[k]);
    }
    records.push(record("sandwich", w, tol));

    records.push(match velocity_bounds(problem, sol.grid.a, du[n - 1]) {
        Ok(b) if b.below_a_star => CheckRecord {
            name: "speed_bracket".into(),
            worst: 0.0,
            tol,
            pass: true,
            location: None,
            note: Some(format!("a = {} below a_star = {}; bracket not asserted", sol.grid.a, b.a_star)),
        },
        Ok(b) => {
            let worst = (b.c_lo - c).max(c - b.c_hi).max(0.0);
            CheckRecord {
                name: "speed_bracket".into(),
                worst,
                tol,
                pass: worst <= tol,
                location: None,
                note: Some(format!("[{}, {}]", b.c_lo, b.c_hi)),
            }
        }
        Err(e) => CheckRecord {
            name: "speed_bracket".into(),
            worst: f64::INFINITY,
            tol,
            pass: false,
            location: None,
            note: Some(e.to_string()),
        },
    });

    let integral = reaction_integral(problem, sol);
    let gap = (integral - (c - du[n - 1])).abs();
    records.push(CheckRecord {
        name: "flux_identity".into(),
        worst: gap,
        tol,
        pass: gap <= tol,
        location: None,
        note: None,
    });

    let flux = discrete_flux(problem, sol);
    let mut w = Worst::new();
    for k in 0..flux.len() - 1 {
        w.see(flux[k + 1] - flux[k], x[k + 1]);
    }
    w.see((flux[0] - c).abs(), x[0]);
    records.push(record("monotone_flux", w, tol));

    // Integrated sum of the three equations: the total flux leaving at x = a
    // equals the fresh-mixture flux c (v_u + sum n0 m_u) entering at x = -a.
    let out = -du[n - 1] - lambda * dv[n - 1] + c * (sol.u[n - 1] + sol.v[n - 1] + liquid[n - 1]);
    let inflow = c * (cfg.v_u() + load_u);
    let gap = (out - inflow).abs();
    records.push(CheckRecord {
        name: "energy_closure".into(),
        worst: gap,
        tol,
        pass: gap <= tol,
        location: Some(x[n - 1]),
        note: None,
    });

    CheckReport { records }
}

/// Flux identity and sandwich bound on limit profiles, sampled at `samples`
/// points avoiding kinks.
pub fn check_limit_profiles(p: &LimitProfiles, samples: usize, tol: f64) -> CheckReport {
    let c = p.c();
    let x_bar = p.header.x_bar;
    let lambda = p.lambda;
    let kinks = p.kinks();
    let dx = 1e-4;
    let beta1 = 1f64.min(1.0 / lambda);
    let beta2 = 1f64.max(1.0 / lambda);
    let lo = p.header.x_v.min(0.0) - 8.0 * lambda.max(1.0) / c;
    let hi = x_bar + 2.0;
    let mut flux = Worst::new();
    let mut sandwich = Worst::new();
    for i in 0..samples {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        if kinks.iter().any(|&k| (x - k).abs() < 3.0 * dx) {
            continue;
        }
        let expected = if x < x_bar { c } else { 0.0 };
        flux.see((p.flux(x, dx) - expected).abs(), x);
        let (u, v, liq) = (p.u(x), p.v(x), p.liquid(x));
        sandwich.see(beta1 * (1.0 - u) - liq - v, x);
        sandwich.see(v - beta2 * (1.0 - u), x);
    }
    CheckReport { records: vec![record("limit_flux", flux, tol), record("limit_sandwich", sandwich, tol)] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlameConfig, Laws, ReactionLaw, VaporisationLaw};
    use crate::solver::{exact_tau0_solution, solve_homotopy, Grid, SolverSettings};

    fn problem(config: FlameConfig) -> WaveProblem {
        let laws = Laws::new(
            ReactionLaw::arrhenius(0.5, 0.1).unwrap(),
            VaporisationLaw::power_law((-1f64).exp(), 1.0, 1.0 / 3.0).unwrap(),
        )
        .unwrap();
        WaveProblem::new(laws, config)
    }

    fn solved(config: FlameConfig) -> (WaveProblem, WaveSolution) {
        let p = problem(config);
        let sol = solve_homotopy(&p, &Grid::new(20.0, 2049).unwrap(), &SolverSettings::default()).unwrap();
        (p, sol)
    }

    #[test]
    fn converged_waves_pass() {
        for cfg in [FlameConfig::gaseous(1.0).unwrap(), FlameConfig::monodisperse(2.0, 0.4, 1.0).unwrap()] {
            let (p, sol) = solved(cfg);
            let r = check_wave(&p, &sol, &CheckTolerance::default());
            assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
            let names: Vec<&str> = r.records.iter().map(|r| r.name.as_str()).collect();
            assert_eq!(names.len(), 12);
            let mut unique = names.clone();
            unique.sort();
            unique.dedup();
            assert_eq!(unique.len(), names.len());
        }
    }

    #[test]
    fn negated_v_fails_the_sandwich_at_that_node() {
        let (p, mut sol) = solved(FlameConfig::gaseous(1.0).unwrap());
        let k = sol.grid.mid() - 40;
        sol.v[k] = -sol.v[k];
        let r = check_wave(&p, &sol, &CheckTolerance::default());
        let s = r.get("sandwich").unwrap();
        assert!(!s.pass);
        assert_eq!(s.location, Some(sol.x[k]));
        assert!(!r.get("v_range").unwrap().pass);
    }

    #[test]
    fn tau_zero_flux_identity_is_consistent() {
        let p = problem(FlameConfig::monodisperse(1.0, 0.4, 1.0).unwrap());
        let sol = exact_tau0_solution(&p, &Grid::new(10.0, 1025).unwrap());
        assert_eq!(reaction_integral(&p, &sol), 0.0);
        let r = check_wave(&p, &sol, &CheckTolerance::default());
        let f = r.get("flux_identity").unwrap();
        assert!(f.pass, "{f:?}");
    }

    #[test]
    fn one_sided_derivative_is_second_order_exact_on_quadratics() {
        let h = 0.1;
        let y: Vec<f64> = (0..7)
            .map(|k| {
                let x = k as f64 * h;
                3.0 * x * x - x + 2.0
            })
            .collect();
        let d = derivative(&y, h);
        for (k, dk) in d.iter().enumerate() {
            assert!((dk - (6.0 * k as f64 * h - 1.0)).abs() < 1e-12);
        }
    }
}
