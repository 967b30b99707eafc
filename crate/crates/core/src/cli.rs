//! Command-line driver.
//!
//! Exit codes: 0 success with all checks passing, 1 other failure, 2 solver
//! non-convergence, 3 checks failed, 4 configuration or usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    check_limit_profiles, check_wave, eps_sweep, mu_sweep, overlap_sweep, robust_solve, FiniteEpsilon, SweepReport,
};
use crate::error::{Error, Result};
use crate::hae::{limit_profiles, limit_speed_and_regime, polydisperse_regime, HaeSolution};
use crate::io::{load_config, to_json, write_atomic, Profiles, ResultBundle, RunConfig, Summary};
use crate::model::Laws;
use crate::solver::{solve_with_domain_growth, WaveProblem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_CHECKS: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

const LIMIT_SAMPLES: usize = 1001;
const LIMIT_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(
    name = "sprayflame",
    version,
    about = "Travelling spray flames: bounded-domain solves and the high activation energy limit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "./out")]
    out: PathBuf,

    /// Write profile tables (default).
    #[arg(long, global = true, overrides_with = "no_profiles")]
    profiles: bool,

    /// Skip profile tables.
    #[arg(long = "no-profiles", global = true, overrides_with = "profiles")]
    no_profiles: bool,

    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One finite-epsilon solve on the configured domain.
    Solve,
    /// Limit speed, regime and sampled limit profiles.
    Hae,
    /// Convergence of the speed along the epsilon ladder.
    SweepEps,
    /// Limit speed over the mass grid at fixed liquid load.
    SweepMu,
    /// Overlap of the vaporisation front with the reaction zone.
    Overlap,
    /// Re-run the wave checks on a stored bundle (read from --out unless
    /// --bundle is given).
    Verify {
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Bin-resolved regime classification.
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub command: String,
    pub report: SweepReport,
    pub config: RunConfig,
    pub generated_at: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::SingularJacobian | Error::DomainGrowth { .. } => EXIT_NONCONVERGENCE,
        Error::InvalidConfig(_)
        | Error::InvalidLaw(_)
        | Error::Closure { .. }
        | Error::Domain(_)
        | Error::DegenerateMixture => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

struct Loaded {
    config: RunConfig,
    laws: Laws,
    problem: WaveProblem,
}

fn load(path: Option<&Path>) -> Result<Loaded> {
    let path = path.ok_or_else(|| Error::InvalidConfig("--config is required".into()))?;
    let config = load_config(path)?;
    let laws = config.laws(path.parent())?;
    let problem = WaveProblem::new(laws.clone(), config.flame()?);
    Ok(Loaded { config, laws, problem })
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let profiles = !cli.no_profiles;
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Solve => solve(&load(config)?, &cli.out, profiles),
        Command::Hae => hae(&load(config)?, &cli.out, profiles, "hae", limit_speed_and_regime),
        Command::Poly => hae(&load(config)?, &cli.out, profiles, "poly", polydisperse_regime),
        Command::SweepEps => {
            let l = load(config)?;
            let s = &l.config.solver;
            let report = eps_sweep(&l.problem, &l.config.sweep.eps_ladder, &s.grid()?, &s.settings(), cli.jobs)?;
            write_sweep("sweep-eps", &l.config, report, &cli.out)
        }
        Command::SweepMu => {
            let l = load(config)?;
            let s = &l.config.solver;
            let finite = match l.config.sweep.finite_epsilon {
                Some(epsilon) => Some(FiniteEpsilon { epsilon, grid: s.grid()? }),
                None => None,
            };
            let sw = &l.config.sweep;
            let report =
                mu_sweep(sw.rho_l, &sw.masses, &l.laws, l.config.model.lambda, &s.settings(), finite, cli.jobs)?;
            write_sweep("sweep-mu", &l.config, report, &cli.out)
        }
        Command::Overlap => {
            let l = load(config)?;
            let s = &l.config.solver;
            let report = overlap_sweep(
                &l.problem,
                &l.config.sweep.eps_ladder,
                &s.grid()?,
                &s.settings(),
                l.config.sweep.a_ref,
                cli.jobs,
            )?;
            write_sweep("overlap", &l.config, report, &cli.out)
        }
        Command::Verify { bundle } => verify(bundle.as_deref().unwrap_or(&cli.out), config),
    }
}

fn solve(l: &Loaded, out: &Path, profiles: bool) -> Result<i32> {
    let s = &l.config.solver;
    let grid = s.grid()?;
    let sol = if s.extend_domain {
        solve_with_domain_growth(&l.problem, &grid, &s.settings())?
    } else {
        robust_solve(&l.problem, &grid, &s.settings())?
    };
    let checks = check_wave(&l.problem, &sol, &s.tolerance());
    let limit = limit_speed_and_regime(&l.laws, &l.problem.config).ok();
    let pass = checks.all_pass();
    for r in checks.failures() {
        eprintln!("check {} failed: worst {} > tol {} at {:?}", r.name, r.worst, r.tol, r.location);
    }
    let summary = Summary::for_wave("solve", &l.config, &sol, limit.as_ref(), Some(checks));
    let bundle = ResultBundle { summary, profiles: profiles.then(|| Profiles::from_wave(&sol)) };
    bundle.write(out)?;
    println!("c = {}", sol.c);
    Ok(if pass { EXIT_OK } else { EXIT_CHECKS })
}

fn hae(
    l: &Loaded,
    out: &Path,
    profiles: bool,
    command: &str,
    limit: fn(&Laws, &crate::model::FlameConfig) -> Result<HaeSolution>,
) -> Result<i32> {
    let cfg = &l.problem.config;
    let h = limit(&l.laws, cfg)?;
    let p = limit_profiles(&h, &l.laws, cfg)?;
    let checks = check_limit_profiles(&p, LIMIT_SAMPLES, LIMIT_CHECK_TOL);
    let pass = checks.all_pass();
    let mut summary = Summary::for_limit(command, &l.config, &h);
    summary.checks_pass = Some(pass);
    summary.checks = Some(checks);
    let table = profiles.then(|| {
        let lo = h.x_v.min(0.0) - 8.0 * cfg.lambda().max(1.0) / h.c;
        let hi = h.x_bar + 2.0;
        let x: Vec<f64> = (0..LIMIT_SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (LIMIT_SAMPLES - 1) as f64).collect();
        Profiles {
            u: x.iter().map(|&s| p.u(s)).collect(),
            v: x.iter().map(|&s| p.v(s)).collect(),
            m: (0..cfg.bins().len()).map(|j| x.iter().map(|&s| p.m(j, s)).collect()).collect(),
            x,
        }
    });
    ResultBundle { summary, profiles: table }.write(out)?;
    println!("c = {} ({:?})", h.c, h.regime);
    Ok(if pass { EXIT_OK } else { EXIT_CHECKS })
}

fn write_sweep(command: &str, config: &RunConfig, report: SweepReport, out: &Path) -> Result<i32> {
    for (i, p) in report.points.iter().enumerate() {
        write_atomic(&out.join("points").join(format!("{i:03}")).join("point.json"), to_json(p)?.as_bytes())?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let pass = report.verdicts.iter().all(|v| v.pass) && report.points.iter().all(|p| p.checks_pass != Some(false));
    for v in report.verdicts.iter().filter(|v| !v.pass) {
        eprintln!("verdict {} failed: {}", v.name, v.detail);
    }
    for f in &report.fits {
        match &f.fit {
            Some(fit) => println!("{}: slope {} (rms {}, {} points)", f.name, fit.slope, fit.rms, fit.points),
            None => println!("{}: no fit ({})", f.name, f.error.as_deref().unwrap_or("")),
        }
    }
    let summary = SweepSummary {
        command: command.into(),
        report,
        config: config.clone(),
        generated_at: format!(
            "unix:{}",
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        ),
    };
    write_atomic(&out.join("sweep.json"), to_json(&summary)?.as_bytes())?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECKS })
}

/// `config` overrides the configuration echoed in the bundle; table paths in
/// the echo resolve against the bundle directory.
fn verify(dir: &Path, config: Option<&Path>) -> Result<i32> {
    let bundle = ResultBundle::read(dir)?;
    let (run, base) = match config {
        Some(p) => (load_config(p)?, p.parent().map(Path::to_path_buf)),
        None => (bundle.summary.config.clone(), Some(dir.to_path_buf())),
    };
    let problem = WaveProblem::new(run.laws(base.as_deref())?, run.flame()?);
    let sol = bundle.wave_solution()?;
    let report = check_wave(&problem, &sol, &run.solver.tolerance());
    for r in &report.records {
        println!("{:<16} {} worst {:e} tol {:e}", r.name, if r.pass { "pass" } else { "FAIL" }, r.worst, r.tol);
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_CHECKS })
}
