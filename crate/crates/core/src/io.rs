//! Run configuration documents and result bundles on disk.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{CheckReport, CheckTolerance, DEFAULT_C_H2};
use crate::error::{Error, Result};
use crate::hae::{HaeSolution, Regime};
use crate::model::{DropletBin, FlameConfig, Laws, ReactionLaw, VaporisationLaw, VaporisationTable};
use crate::solver::{Grid, SolverSettings, WaveSolution};

pub const SUMMARY_FILE: &str = "summary.json";
pub const PROFILES_FILE: &str = "profiles.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub lambda: f64,
    pub v_u: f64,
    #[serde(default)]
    pub bins: Vec<DropletBin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionBlock {
    Arrhenius {
        theta_i: f64,
        epsilon: f64,
    },
    /// `(u, f)` samples on `[theta_i, 1]`, inline or from a JSON file holding
    /// the same array.
    Tabulated {
        theta_i: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<(f64, f64)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VaporisationBlock {
    PowerLaw {
        theta_v: f64,
        g0: f64,
        delta: f64,
    },
    Instantaneous {
        theta_v: f64,
    },
    /// Onset is the first tabulated temperature.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<VaporisationTable>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub a: f64,
    pub n: usize,
    /// Double the domain until the speed settles.
    pub extend_domain: bool,
    /// Constant of the `h^2` term in the check tolerance.
    pub check_c_h2: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub tau_steps: usize,
    pub max_tau_halvings: usize,
    pub damping: f64,
    pub domain_tol: f64,
    pub max_doublings: usize,
    pub warm_start: bool,
    pub eps_start: f64,
    pub eps_ratio: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            a: 30.0,
            n: 4097,
            extend_domain: false,
            check_c_h2: DEFAULT_C_H2,
            newton_tol: s.newton_tol,
            max_newton: s.max_newton,
            tau_steps: s.tau_steps,
            max_tau_halvings: s.max_tau_halvings,
            damping: s.damping,
            domain_tol: s.domain_tol,
            max_doublings: s.max_doublings,
            warm_start: s.warm_start,
            eps_start: s.eps_start,
            eps_ratio: s.eps_ratio,
        }
    }
}

impl SolverBlock {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            newton_tol: self.newton_tol,
            max_newton: self.max_newton,
            tau_steps: self.tau_steps,
            max_tau_halvings: self.max_tau_halvings,
            damping: self.damping,
            domain_tol: self.domain_tol,
            max_doublings: self.max_doublings,
            warm_start: self.warm_start,
            eps_start: self.eps_start,
            eps_ratio: self.eps_ratio,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.a, self.n)
    }

    pub fn tolerance(&self) -> CheckTolerance {
        CheckTolerance { newton_tol: self.newton_tol, c_h2: self.check_c_h2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub eps_ladder: Vec<f64>,
    /// Fixed liquid load `n0 m_u` of the mass sweep.
    pub rho_l: f64,
    pub masses: Vec<f64>,
    /// Also solve at this `epsilon` at every mass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_epsilon: Option<f64>,
    pub a_ref: f64,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            eps_ladder: vec![0.1, 0.08, 0.05, 0.04, 0.025, 0.02],
            rho_l: 0.4,
            masses: Vec::new(),
            finite_epsilon: None,
            a_ref: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub reaction: ReactionBlock,
    pub vaporisation: VaporisationBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_with_pointer(&text).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::InvalidConfig(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn one_of<T: for<'de> Deserialize<'de> + Clone>(
    what: &str,
    inline: &Option<T>,
    path: &Option<PathBuf>,
    base: Option<&Path>,
) -> Result<T> {
    match (inline, path) {
        (Some(t), None) => Ok(t.clone()),
        (None, Some(p)) => read_json(&resolve(base, p)),
        _ => Err(Error::InvalidConfig(format!("{what}: give exactly one of `table` and `table_path`"))),
    }
}

impl RunConfig {
    pub fn laws(&self, base: Option<&Path>) -> Result<Laws> {
        let reaction = match &self.reaction {
            ReactionBlock::Arrhenius { theta_i, epsilon } => ReactionLaw::arrhenius(*theta_i, *epsilon)?,
            ReactionBlock::Tabulated { theta_i, table, table_path } => {
                ReactionLaw::tabulated(*theta_i, one_of("/reaction", table, table_path, base)?)?
            }
        };
        let vaporisation = match &self.vaporisation {
            VaporisationBlock::PowerLaw { theta_v, g0, delta } => VaporisationLaw::power_law(*theta_v, *g0, *delta)?,
            VaporisationBlock::Instantaneous { theta_v } => VaporisationLaw::instantaneous(*theta_v)?,
            VaporisationBlock::Tabulated { table, table_path } => {
                VaporisationLaw::tabulated(one_of("/vaporisation", table, table_path, base)?)?
            }
        };
        Laws::new(reaction, vaporisation)
    }

    pub fn flame(&self) -> Result<FlameConfig> {
        FlameConfig::new(self.model.lambda, self.model.v_u, self.model.bins.clone())
    }
}

/// Renders a `serde_path_to_error` path as a JSON pointer.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => {
                let _ = write!(out, "/{index}");
            }
            Segment::Map { key } => {
                let _ = write!(out, "/{}", key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => {
                let _ = write!(out, "/{variant}");
            }
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn parse_with_pointer<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Error::InvalidConfig(format!(
            "at {} (line {}, column {}): {inner}",
            pointer(e.path()),
            inner.line(),
            inner.column()
        ))
    })
}

/// Parses and validates a configuration document. Table paths are resolved
/// against `base`.
pub fn parse_config(text: &str, base: Option<&Path>) -> Result<RunConfig> {
    let cfg: RunConfig = parse_with_pointer(text)?;
    cfg.laws(base)?;
    cfg.flame()?;
    cfg.solver.grid()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, path.parent())
}

/// Serializes `+inf` as `null` and reads `null` back as `+inf`.
pub(crate) mod inf_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub mod vec {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| x.is_finite().then_some(*x)))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let v = Vec::<Option<f64>>::deserialize(d)?;
            Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub c: f64,
    pub regime: Regime,
    pub boundary: bool,
    pub c_gas: f64,
    #[serde(with = "inf_null")]
    pub c_star: f64,
    pub x_bar: f64,
    pub x_v: f64,
    pub x_vf: Option<f64>,
    #[serde(with = "inf_null::vec")]
    pub bin_c_star: Vec<f64>,
    pub bin_fronts: Vec<Option<f64>>,
}

impl From<&HaeSolution> for LimitSummary {
    fn from(h: &HaeSolution) -> Self {
        Self {
            c: h.c,
            regime: h.regime,
            boundary: h.boundary,
            c_gas: h.c_gas,
            c_star: h.c_star,
            x_bar: h.x_bar,
            x_v: h.x_v,
            x_vf: h.x_vf,
            bin_c_star: h.bin_c_star.clone(),
            bin_fronts: h.bin_fronts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub a: f64,
    pub n: usize,
    pub tau: f64,
    pub newton_iterations: usize,
    pub onset: Vec<Option<f64>>,
    pub fronts: Vec<Option<f64>>,
}

/// Top-level record of a run. `generated_at` is the only field that varies
/// between identical runs and is written last, on its own line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub c: f64,
    pub regime: Option<Regime>,
    pub x_bar: Option<f64>,
    pub x_v: Option<f64>,
    pub x_vf: Option<f64>,
    pub residual: Option<f64>,
    pub checks_pass: Option<bool>,
    pub wave: Option<WaveSummary>,
    pub limit: Option<LimitSummary>,
    pub checks: Option<CheckReport>,
    pub config: RunConfig,
    pub generated_at: String,
}

impl Summary {
    /// Summary of a finite-epsilon solve. `x_bar` is the pinned ignition
    /// point, `x_v` the first onset and `x_vf` the last front.
    pub fn for_wave(
        command: &str,
        config: &RunConfig,
        sol: &WaveSolution,
        limit: Option<&HaeSolution>,
        checks: Option<CheckReport>,
    ) -> Self {
        Self {
            command: command.into(),
            c: sol.c,
            regime: limit.map(|h| h.regime),
            x_bar: Some(0.0),
            x_v: sol.onset.iter().flatten().copied().reduce(f64::min),
            x_vf: sol.fronts.iter().flatten().copied().reduce(f64::max),
            residual: Some(sol.residual),
            checks_pass: checks.as_ref().map(CheckReport::all_pass),
            wave: Some(WaveSummary {
                a: sol.grid.a,
                n: sol.grid.n,
                tau: sol.tau,
                newton_iterations: sol.newton_iterations,
                onset: sol.onset.clone(),
                fronts: sol.fronts.clone(),
            }),
            limit: limit.map(LimitSummary::from),
            checks,
            config: config.clone(),
            generated_at: timestamp(),
        }
    }

    pub fn for_limit(command: &str, config: &RunConfig, h: &HaeSolution) -> Self {
        Self {
            command: command.into(),
            c: h.c,
            regime: Some(h.regime),
            x_bar: Some(h.x_bar),
            x_v: Some(h.x_v),
            x_vf: h.x_vf,
            residual: None,
            checks_pass: None,
            wave: None,
            limit: Some(h.into()),
            checks: None,
            config: config.clone(),
            generated_at: timestamp(),
        }
    }
}

fn timestamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

/// Profile table with columns `x, u, v, m`, where `m` is the first bin's
/// mass (zero without bins) and further bins follow as `m2, m3, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub m: Vec<Vec<f64>>,
}

impl Profiles {
    pub fn from_wave(sol: &WaveSolution) -> Self {
        Self { x: sol.x.clone(), u: sol.u.clone(), v: sol.v.clone(), m: sol.m.clone() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,u,v,m");
        for j in 2..=self.m.len() {
            let _ = write!(out, ",m{j}");
        }
        out.push('\n');
        for k in 0..self.x.len() {
            let _ = write!(out, "{:.16e},{:.16e},{:.16e}", self.x[k], self.u[k], self.v[k]);
            if self.m.is_empty() {
                let _ = write!(out, ",{:.16e}", 0.0);
            }
            for col in &self.m {
                let _ = write!(out, ",{:.16e}", col[k]);
            }
            out.push('\n');
        }
        out
    }

    /// `bins` is the number of mass columns to keep; a gaseous table carries
    /// one all-zero `m` column that is dropped.
    pub fn from_csv(text: &str, bins: usize) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::InvalidConfig(format!("profiles line {line}: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 4 || cols[..4] != ["x", "u", "v", "m"] {
            return Err(bad(1, "header must start with x,u,v,m"));
        }
        if bins > cols.len() - 3 {
            return Err(bad(1, &format!("expected {bins} mass columns, found {}", cols.len() - 3)));
        }
        let mut p = Self { x: Vec::new(), u: Vec::new(), v: Vec::new(), m: vec![Vec::new(); bins] };
        for (i, line) in lines.enumerate() {
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| bad(i + 2, &e.to_string()))?;
            if vals.len() != cols.len() {
                return Err(bad(i + 2, "wrong number of fields"));
            }
            p.x.push(vals[0]);
            p.u.push(vals[1]);
            p.v.push(vals[2]);
            for j in 0..bins {
                p.m[j].push(vals[3 + j]);
            }
        }
        Ok(p)
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub summary: Summary,
    pub profiles: Option<Profiles>,
}

impl ResultBundle {
    /// Writes both files; the profile table first so that a present summary
    /// always refers to complete profiles.
    pub fn write(&self, dir: &Path) -> Result<()> {
        if let Some(p) = &self.profiles {
            write_atomic(&dir.join(PROFILES_FILE), p.to_csv().as_bytes())?;
        }
        write_atomic(&dir.join(SUMMARY_FILE), to_json(&self.summary)?.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let summary: Summary = read_json(&path)?;
        let csv = dir.join(PROFILES_FILE);
        let profiles = if csv.exists() {
            let text = fs::read_to_string(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
            Some(Profiles::from_csv(&text, summary.config.model.bins.len())?)
        } else {
            None
        };
        Ok(Self { summary, profiles })
    }

    /// Rebuilds the solution recorded by a `solve` run.
    pub fn wave_solution(&self) -> Result<WaveSolution> {
        let w = self.summary.wave.as_ref().ok_or_else(|| Error::InvalidConfig("summary holds no wave".into()))?;
        let p = self.profiles.as_ref().ok_or_else(|| Error::InvalidConfig("bundle has no profiles".into()))?;
        let grid = Grid::new(w.a, w.n)?;
        if p.x.len() != w.n {
            return Err(Error::InvalidConfig(format!("profiles hold {} rows, grid has {}", p.x.len(), w.n)));
        }
        Ok(WaveSolution {
            grid,
            x: p.x.clone(),
            u: p.u.clone(),
            v: p.v.clone(),
            m: p.m.clone(),
            c: self.summary.c,
            tau: w.tau,
            onset: w.onset.clone(),
            fronts: w.fronts.clone(),
            newton_iterations: w.newton_iterations,
            residual: self.summary.residual.unwrap_or(f64::NAN),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAS: &str = r#"{
        "model": {"lambda": 1, "v_u": 1},
        "reaction": {"kind": "arrhenius", "theta_i": 0.5, "epsilon": 0.1},
        "vaporisation": {"kind": "power_law", "theta_v": 0.3, "g0": 1, "delta": 0}
    }"#;

    #[test]
    fn minimal_gaseous_document() {
        let cfg = parse_config(GAS, None).unwrap();
        assert!(cfg.model.bins.is_empty());
        assert_eq!(cfg.solver, SolverBlock::default());
        assert!(cfg.flame().unwrap().is_gaseous());
    }

    #[test]
    fn spray_document() {
        let doc = GAS.replace(r#""v_u": 1"#, r#""v_u": 0.6, "bins": [{"n0": 1, "m_u": 0.4}]"#);
        let cfg = parse_config(&doc, None).unwrap();
        assert_eq!(cfg.model.bins, vec![DropletBin { n0: 1.0, m_u: 0.4 }]);
    }

    #[test]
    fn ordering_violation_is_rejected() {
        let doc = GAS.replace(r#""theta_v": 0.3"#, r#""theta_v": 0.5"#);
        let err = parse_config(&doc, None).unwrap_err();
        assert!(matches!(err, Error::InvalidLaw(ref m) if m.contains("below ignition")), "{err}");
    }

    #[test]
    fn closure_violation_is_rejected() {
        let doc = GAS.replace(r#""v_u": 1"#, r#""v_u": 0.7, "bins": [{"n0": 1, "m_u": 0.4}]"#);
        assert!(matches!(parse_config(&doc, None), Err(Error::Closure { .. })));
    }

    #[test]
    fn unknown_key_reports_pointer() {
        let doc = GAS.replace(r#""theta_i": 0.5"#, r#""theta_i": 0.5, "bogus": 1"#);
        let err = parse_config(&doc, None).unwrap_err().to_string();
        assert!(err.contains("/reaction") && err.contains("bogus"), "{err}");
        let doc = GAS.replace(r#""v_u": 1"#, r#""v_u": 1, "bins": [{"n0": "x", "m_u": 0.4}]"#);
        let err = parse_config(&doc, None).unwrap_err().to_string();
        assert!(err.contains("/model/bins/0/n0"), "{err}");
    }

    #[test]
    fn table_must_come_from_exactly_one_source() {
        let doc =
            GAS.replace(r#"{"kind": "power_law", "theta_v": 0.3, "g0": 1, "delta": 0}"#, r#"{"kind": "tabulated"}"#);
        assert!(matches!(parse_config(&doc, None), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn table_path_is_resolved_against_the_config() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("f.json"), "[[0.5, 1.0], [1.0, 2.0]]").unwrap();
        let doc = GAS.replace(
            r#"{"kind": "arrhenius", "theta_i": 0.5, "epsilon": 0.1}"#,
            r#"{"kind": "tabulated", "theta_i": 0.5, "table_path": "f.json"}"#,
        );
        let cfg = parse_config(&doc, Some(dir.path())).unwrap();
        assert!(cfg.laws(Some(dir.path())).unwrap().reaction.epsilon().is_none());
    }

    #[test]
    fn profiles_csv_round_trip() {
        let p = Profiles {
            x: vec![-1.0, 0.0, 1.0 / 3.0],
            u: vec![0.1, 0.5, 1.0],
            v: vec![0.9, 0.2, 1e-300],
            m: vec![vec![1.0, 0.25, 0.0], vec![0.5, 0.1, std::f64::consts::PI]],
        };
        let text = p.to_csv();
        assert!(text.starts_with("x,u,v,m,m2\n"));
        assert!(!text.contains('\r'));
        assert_eq!(Profiles::from_csv(&text, 2).unwrap(), p);
        let first = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string();
        assert_eq!(first, "9.0000000000000002e-1");
    }

    #[test]
    fn infinite_speeds_round_trip_through_null() {
        let s = LimitSummary {
            c: 1.0,
            regime: Regime::DiffusionLimited,
            boundary: false,
            c_gas: 1.0,
            c_star: f64::INFINITY,
            x_bar: 0.5,
            x_v: -0.1,
            x_vf: None,
            bin_c_star: vec![f64::INFINITY, 2.0],
            bin_fronts: vec![None, Some(0.1)],
        };
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""c_star":null"#));
        assert_eq!(serde_json::from_str::<LimitSummary>(&text).unwrap(), s);
    }

    proptest::proptest! {
        #[test]
        fn csv_is_bit_exact(rows in proptest::collection::vec(
            (proptest::num::f64::NORMAL, proptest::num::f64::NORMAL, proptest::num::f64::NORMAL, proptest::num::f64::NORMAL), 1..20)) {
            let p = Profiles {
                x: rows.iter().map(|r| r.0).collect(),
                u: rows.iter().map(|r| r.1).collect(),
                v: rows.iter().map(|r| r.2).collect(),
                m: vec![rows.iter().map(|r| r.3).collect()],
            };
            let back = Profiles::from_csv(&p.to_csv(), 1).unwrap();
            proptest::prop_assert_eq!(back, p);
        }
    }
}
