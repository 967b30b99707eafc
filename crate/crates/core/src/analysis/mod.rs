//! Verification of computed waves and the experiment drivers.

pub mod check;
pub mod fit;
pub mod oracle;
pub mod sweep;

pub use check::{check_limit_profiles, check_wave, CheckRecord, CheckReport, CheckTolerance, DEFAULT_C_H2};
pub use fit::{fit_power_law, LogLogFit, MIN_FIT_POINTS};
pub use oracle::oracle_mass_march;
pub use sweep::{
    eps_sweep, mu_sweep, overlap_sweep, refinement_study, robust_solve, FiniteEpsilon, NamedFit, RefinementStudy,
    SweepPoint, SweepReport, Verdict,
};
