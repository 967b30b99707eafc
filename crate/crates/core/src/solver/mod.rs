//! Travelling waves on a bounded domain `[-a, a]`: damped Newton on a banded
//! discretization, continued from an explicit solution along a homotopy that
//! scales the reaction and vaporisation rates by `tau` in `[0, 1]`.

mod assembly;
pub mod bounds;
pub mod march;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FlameConfig, Laws};

pub(crate) use assembly::fitted_sigma;
use assembly::{assemble, Layout};
pub use bounds::{velocity_bounds, VelocityBounds};
pub use march::{march_bin, BinMarch};

/// Uniform grid on `[-a, a]` with an odd number of nodes so that `x = 0` is a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidConfig(format!("half-width a must be positive, got {a}")));
        }
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("node count must be odd and at least 5, got {n}")));
        }
        Ok(Self { a, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.a / (self.n - 1) as f64
    }

    pub fn mid(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn x(&self, k: usize) -> f64 {
        // Symmetric evaluation keeps x(mid) = 0 exactly.
        (k as f64 - self.mid() as f64) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }

    /// Same spacing on a domain twice as wide.
    pub fn doubled(&self) -> Self {
        Self { a: 2.0 * self.a, n: 2 * self.n - 1 }
    }

    /// Halved spacing on the same domain.
    pub fn refined(&self) -> Self {
        Self { a: self.a, n: 2 * self.n - 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProblem {
    pub laws: Laws,
    pub config: FlameConfig,
}

impl WaveProblem {
    pub fn new(laws: Laws, config: FlameConfig) -> Self {
        Self { laws, config }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Ok(Self { laws: self.laws.with_epsilon(epsilon)?, config: self.config.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub newton_tol: f64,
    pub max_newton: usize,
    pub tau_steps: usize,
    pub max_tau_halvings: usize,
    pub damping: f64,
    pub domain_tol: f64,
    pub max_doublings: usize,
    /// Try Newton directly at `tau = 1` from a supplied guess before
    /// falling back to the homotopy.
    pub warm_start: bool,
    /// Largest `epsilon` solved by homotopy before continuing downward.
    pub eps_start: f64,
    pub eps_ratio: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            max_newton: 50,
            tau_steps: 20,
            max_tau_halvings: 12,
            damping: 0.5,
            domain_tol: 1e-8,
            max_doublings: 6,
            warm_start: true,
            eps_start: 0.1,
            eps_ratio: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSolution {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Droplet mass per bin, `m[j][k]`.
    pub m: Vec<Vec<f64>>,
    pub c: f64,
    pub tau: f64,
    pub onset: Vec<Option<f64>>,
    /// Complete vaporisation point per bin, `None` past the domain.
    pub fronts: Vec<Option<f64>>,
    pub newton_iterations: usize,
    pub residual: f64,
}

impl WaveSolution {
    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Total liquid mass `sum_j n0_j m_j` per node.
    pub fn liquid(&self, config: &FlameConfig) -> Vec<f64> {
        (0..self.x.len()).map(|k| config.bins().iter().zip(&self.m).map(|(b, m)| b.n0 * m[k]).sum()).collect()
    }

    /// Profiles sampled on another grid: linear interpolation inside the
    /// current domain, and outside it the exact outer solutions (exponential
    /// preheat on the left, burnt state on the right).
    pub fn resample(&self, problem: &WaveProblem, grid: &Grid) -> WaveSolution {
        let lambda = problem.config.lambda();
        let v_u = problem.config.v_u();
        let c = self.c;
        let x0 = self.x[0];
        let xn = self.x[self.x.len() - 1];
        let nodes = grid.nodes();
        let interp = |y: &[f64], x: f64| -> f64 {
            let h = self.h();
            let t = (x - x0) / h;
            let k = (t.floor() as usize).min(self.x.len() - 2);
            let s = t - k as f64;
            y[k] + (y[k + 1] - y[k]) * s
        };
        let mut u = Vec::with_capacity(grid.n);
        let mut v = Vec::with_capacity(grid.n);
        let mut m = vec![Vec::with_capacity(grid.n); self.m.len()];
        for &x in &nodes {
            if x < x0 {
                u.push(self.u[0] * (c * (x - x0)).exp());
                v.push(v_u + (self.v[0] - v_u) * (c * (x - x0) / lambda).exp());
                for (mj, sj) in m.iter_mut().zip(&self.m) {
                    mj.push(sj[0]);
                }
            } else if x > xn {
                u.push(*self.u.last().unwrap());
                v.push(*self.v.last().unwrap());
                for (mj, sj) in m.iter_mut().zip(&self.m) {
                    mj.push(*sj.last().unwrap());
                }
            } else {
                u.push(interp(&self.u, x));
                v.push(interp(&self.v, x));
                for (mj, sj) in m.iter_mut().zip(&self.m) {
                    mj.push(interp(sj, x));
                }
            }
        }
        WaveSolution {
            grid: *grid,
            x: nodes,
            u,
            v,
            m,
            c,
            tau: self.tau,
            onset: self.onset.clone(),
            fronts: self.fronts.clone(),
            newton_iterations: 0,
            residual: f64::NAN,
        }
    }

    fn pack(&self) -> Vec<f64> {
        let lay = Layout { n: self.grid.n, bins: self.m.len() };
        let mut x = vec![0.0; lay.len()];
        for k in 0..self.grid.n {
            x[lay.u(k)] = self.u[k];
            x[lay.v(k)] = self.v[k];
            x[lay.c(k)] = self.c;
            for (j, mj) in self.m.iter().enumerate() {
                x[lay.m(j, k)] = mj[k];
            }
        }
        x
    }
}

/// Explicit solution of the `tau = 0` problem with the pinning condition.
pub fn exact_tau0_solution(problem: &WaveProblem, grid: &Grid) -> WaveSolution {
    let theta_i = problem.laws.reaction.theta_i();
    let lambda = problem.config.lambda();
    let v_u = problem.config.v_u();
    let c0 = (1.0 / theta_i).ln() / grid.a;
    let x = grid.nodes();
    let a = grid.a;
    let u = x.iter().map(|&xi| (c0 * (xi - a)).exp()).collect();
    let v = x.iter().map(|&xi| -v_u * (c0 * (xi - a) / lambda).exp_m1()).collect();
    let m = problem.config.bins().iter().map(|b| vec![b.m_u; grid.n]).collect();
    let nb = problem.config.bins().len();
    WaveSolution {
        grid: *grid,
        x,
        u,
        v,
        m,
        c: c0,
        tau: 0.0,
        onset: vec![None; nb],
        fronts: vec![None; nb],
        newton_iterations: 0,
        residual: 0.0,
    }
}

/// Max-norm of the discrete residual of `sol` at homotopy parameter `tau`.
pub fn residual_norm(problem: &WaveProblem, sol: &WaveSolution, tau: f64) -> f64 {
    let (f, _) = assemble(problem, &sol.grid, tau, &sol.pack(), false);
    max_norm(&f)
}

fn max_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2_norm(f: &[f64]) -> f64 {
    f.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Overwrites the mass unknowns with the march driven by the current `u`, `c`.
fn remarch(problem: &WaveProblem, grid: &Grid, tau: f64, x: &mut [f64]) {
    let bins = problem.config.bins();
    if bins.is_empty() {
        return;
    }
    let lay = Layout { n: grid.n, bins: bins.len() };
    let nodes = grid.nodes();
    let u: Vec<f64> = (0..grid.n).map(|k| x[lay.u(k)]).collect();
    let c: Vec<f64> = (0..grid.n).map(|k| x[lay.c(k)]).collect();
    for (j, b) in bins.iter().enumerate() {
        let out = march_bin(&problem.laws.vaporisation, b.m_u, &nodes, &u, &c, tau);
        for k in 0..grid.n {
            x[lay.m(j, k)] = out.m[k];
        }
    }
}

fn unpack(problem: &WaveProblem, grid: &Grid, tau: f64, x: &[f64], iters: usize, residual: f64) -> WaveSolution {
    let bins = problem.config.bins();
    let lay = Layout { n: grid.n, bins: bins.len() };
    let nodes = grid.nodes();
    let u: Vec<f64> = (0..grid.n).map(|k| x[lay.u(k)]).collect();
    let v: Vec<f64> = (0..grid.n).map(|k| x[lay.v(k)]).collect();
    let cs: Vec<f64> = (0..grid.n).map(|k| x[lay.c(k)]).collect();
    let mut m = Vec::with_capacity(bins.len());
    let mut onset = Vec::with_capacity(bins.len());
    let mut fronts = Vec::with_capacity(bins.len());
    for (j, b) in bins.iter().enumerate() {
        m.push((0..grid.n).map(|k| x[lay.m(j, k)]).collect());
        let out = march_bin(&problem.laws.vaporisation, b.m_u, &nodes, &u, &cs, tau);
        onset.push(out.onset);
        fronts.push(out.front);
    }
    WaveSolution {
        grid: *grid,
        x: nodes,
        u,
        v,
        m,
        c: cs[grid.mid()],
        tau,
        onset,
        fronts,
        newton_iterations: iters,
        residual,
    }
}

/// Damped Newton at fixed `tau`, starting from `x0`.
fn newton(
    problem: &WaveProblem,
    grid: &Grid,
    tau: f64,
    x0: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, usize, f64)> {
    let lay = Layout { n: grid.n, bins: problem.config.bins().len() };
    let mut x = x0.to_vec();
    remarch(problem, grid, tau, &mut x);
    let fail = Error::NonConvergence { tau };
    for it in 0..settings.max_newton {
        let (f, jac) = assemble(problem, grid, tau, &x, true);
        let r = max_norm(&f);
        if !r.is_finite() {
            return Err(fail);
        }
        if r <= settings.newton_tol {
            return Ok((x, it, r));
        }
        let lu = jac.expect("jacobian requested").factor()?;
        let mut dx: Vec<f64> = f.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut dx);
        let merit = l2_norm(&f);
        let mut lambda = 1.0;
        loop {
            let mut trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + lambda * b).collect();
            let speeds_ok = (0..grid.n).all(|k| trial[lay.c(k)] > 0.0);
            if speeds_ok {
                remarch(problem, grid, tau, &mut trial);
                let (ft, _) = assemble(problem, grid, tau, &trial, false);
                let mt = l2_norm(&ft);
                if mt.is_finite() && (mt <= (1.0 - 1e-4 * lambda) * merit || max_norm(&ft) <= settings.newton_tol) {
                    x = trial;
                    break;
                }
            }
            lambda *= settings.damping;
            if lambda < 1e-6 {
                return Err(fail);
            }
        }
    }
    let (f, _) = assemble(problem, grid, tau, &x, false);
    let r = max_norm(&f);
    if r <= settings.newton_tol {
        Ok((x, settings.max_newton, r))
    } else {
        Err(fail)
    }
}

/// Newton at `tau = 1` from `guess` resampled onto `grid`.
pub fn solve_from(
    problem: &WaveProblem,
    grid: &Grid,
    guess: &WaveSolution,
    settings: &SolverSettings,
) -> Result<WaveSolution> {
    let start = if guess.grid == *grid { guess.clone() } else { guess.resample(problem, grid) };
    let (x, it, r) = newton(problem, grid, 1.0, &start.pack(), settings)?;
    Ok(unpack(problem, grid, 1.0, &x, it, r))
}

/// Solves the bounded-domain problem at `tau = 1` by continuation from the
/// explicit `tau = 0` solution.
pub fn solve_homotopy(problem: &WaveProblem, grid: &Grid, settings: &SolverSettings) -> Result<WaveSolution> {
    let start = exact_tau0_solution(problem, grid);
    let mut x = start.pack();
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut tau = 0.0;
    let base = 1.0 / settings.tau_steps.max(1) as f64;
    let min_step = base / f64::powi(2.0, settings.max_tau_halvings as i32);
    let mut step = base;
    let mut total_iters = 0;
    let mut last_res = 0.0;
    while tau < 1.0 {
        let next = (tau + step).min(1.0);
        // Secant predictor from the last two accepted points.
        let guess: Vec<f64> = match &prev {
            Some((tp, xp)) if tau > *tp => {
                let s = (next - tau) / (tau - tp);
                x.iter().zip(xp).map(|(a, b)| a + s * (a - b)).collect()
            }
            _ => x.clone(),
        };
        let attempt =
            newton(problem, grid, next, &guess, settings).or_else(|_| newton(problem, grid, next, &x, settings));
        match attempt {
            Ok((xn, it, r)) => {
                prev = Some((tau, std::mem::replace(&mut x, xn)));
                tau = next;
                total_iters += it;
                last_res = r;
                step = (2.0 * step).min(base);
            }
            Err(_) => {
                step *= 0.5;
                if step < min_step {
                    return Err(Error::NonConvergence { tau });
                }
            }
        }
    }
    Ok(unpack(problem, grid, 1.0, &x, total_iters, last_res))
}

/// Direct Newton from `warm` when allowed, homotopy otherwise or on failure.
pub fn solve_bounded(
    problem: &WaveProblem,
    grid: &Grid,
    settings: &SolverSettings,
    warm: Option<&WaveSolution>,
) -> Result<WaveSolution> {
    if settings.warm_start {
        if let Some(guess) = warm {
            if let Ok(sol) = solve_from(problem, grid, guess, settings) {
                return Ok(sol);
            }
        }
    }
    solve_homotopy(problem, grid, settings)
}

/// Continues in `epsilon` from `settings.eps_start` (or the target if larger)
/// down to the target, shrinking the ratio when a step fails.
pub fn solve_epsilon_continuation(
    problem: &WaveProblem,
    grid: &Grid,
    settings: &SolverSettings,
) -> Result<WaveSolution> {
    let target = problem
        .laws
        .reaction
        .epsilon()
        .ok_or_else(|| Error::InvalidConfig("epsilon continuation needs an Arrhenius reaction law".into()))?;
    if target >= settings.eps_start {
        return solve_homotopy(problem, grid, settings);
    }
    let mut eps = settings.eps_start;
    let mut sol = solve_homotopy(&problem.with_epsilon(eps)?, grid, settings)?;
    let mut ratio = settings.eps_ratio;
    while eps > target {
        let next = (eps * ratio).max(target);
        match solve_from(&problem.with_epsilon(next)?, grid, &sol, settings) {
            Ok(s) => {
                sol = s;
                eps = next;
                ratio = (ratio * ratio).max(settings.eps_ratio);
            }
            Err(_) => {
                ratio = ratio.sqrt();
                if ratio > 0.999 {
                    return Err(Error::NonConvergence { tau: 1.0 });
                }
            }
        }
    }
    Ok(sol)
}

/// Doubles the domain at fixed spacing until the speed settles to
/// `domain_tol`.
pub fn solve_with_domain_growth(problem: &WaveProblem, grid: &Grid, settings: &SolverSettings) -> Result<WaveSolution> {
    let mut sol = solve_epsilon_or_homotopy(problem, grid, settings)?;
    for _ in 0..settings.max_doublings {
        let wider = sol.grid.doubled();
        let next = match solve_from(problem, &wider, &sol, settings) {
            Ok(s) => s,
            Err(_) => solve_epsilon_or_homotopy(problem, &wider, settings)?,
        };
        let settled = (next.c - sol.c).abs() <= settings.domain_tol;
        sol = next;
        if settled {
            return Ok(sol);
        }
    }
    Err(Error::DomainGrowth { doublings: settings.max_doublings })
}

/// Homotopy for tabulated laws or moderate `epsilon`, `epsilon` continuation
/// below `eps_start`.
pub fn solve_epsilon_or_homotopy(
    problem: &WaveProblem,
    grid: &Grid,
    settings: &SolverSettings,
) -> Result<WaveSolution> {
    match problem.laws.reaction.epsilon() {
        Some(eps) if eps < settings.eps_start => solve_epsilon_continuation(problem, grid, settings),
        _ => solve_homotopy(problem, grid, settings),
    }
}
