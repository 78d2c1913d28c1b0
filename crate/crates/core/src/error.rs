use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error(
        "dispersal budget vanishes at the evaluation point (g = {g:e}); exclude or regularize it"
    )]
    DegeneratePoint { g: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "power iteration did not converge after {iterations} iterations (bracket [{lower}, {upper}])"
    )]
    NotConverged {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("matrix appears reducible: Perron vector vanished at node {node}")]
    Reducible { node: usize },

    #[error("vector must be strictly positive (entry {node} = {value})")]
    NonPositiveVector { node: usize, value: f64 },

    #[error("no root of F(lambda) = 1 away from the pole (F = {f_at_guard} at the guard point); the existence criterion fails on this grid")]
    CriterionFailure { f_at_guard: f64 },

    #[error("principal eigenvalue {lambda_p:e} is resonant with zero; perturb the coefficient")]
    Resonance { lambda_p: f64 },

    #[error("witness construction failed: {0}")]
    Witness(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("monotone iteration broke ordering at step {step}: {detail}; increase k")]
    Monotonicity { step: usize, detail: String },

    #[error("subsolution search failed: {0}")]
    Subsolution(String),

    #[error("positivity breach at t = {t}: min u = {min_u:e}; reduce dt")]
    Stability { t: f64, min_u: f64 },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
}
