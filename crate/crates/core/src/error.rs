use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid law: {0}")]
    InvalidLaw(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("closure violated: v_u + sum(n0 * m_u) = {total} (expected 1)")]
    Closure { total: f64 },

    #[error("degenerate mixture: rho_0 * Y_u + n_0 * M_u must be positive")]
    DegenerateMixture,

    #[error("vaporisation never completes at temperature {theta} (onset {theta_v})")]
    InfiniteVaporisationTime { theta: f64, theta_v: f64 },

    #[error("wave speed must be positive, got {0}")]
    InvalidSpeed(f64),

    #[error("homotopy stalled at tau = {tau}")]
    NonConvergence { tau: f64 },

    #[error("jacobian is singular to working precision")]
    SingularJacobian,

    #[error("domain growth did not settle after {doublings} doublings")]
    DomainGrowth { doublings: usize },

    #[error("root not bracketed after {growths} bracket expansions")]
    RootNotBracketed { growths: usize },

    #[error("not enough data: {got} usable points, need {need}")]
    InsufficientData { got: usize, need: usize },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("i/o: {0}")]
    Io(String),
}
