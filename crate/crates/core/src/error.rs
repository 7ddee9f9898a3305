use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to diagnose a
/// failed run from the message alone.
#[derive(Debug, Error)]
pub enum Error {
    #[error("equal states: |c_left - c_right| = {gap:e} < 1e-14, shock speed undefined")]
    EqualStates { gap: f64 },

    #[error("quadrature did not converge: depth {depth} reached on [{a}, {b}] (tol {tol:e})")]
    QuadratureNonConvergence { a: f64, b: f64, depth: u32, tol: f64 },

    #[error("convexity violation: {what} = {value:e} at u = {at:?} on [-{bound_m}, {bound_m}]")]
    ConvexityViolation {
        what: &'static str,
        value: f64,
        at: (f64, f64),
        bound_m: f64,
    },

    #[error("no admissible certificate: constraint set infeasible for any lambda <= {limit:e}")]
    CertificateInfeasible { limit: f64 },

    #[error("non-admissible shock: chord condition fails, h({u}) = {h:e} >= 0 strictly between c_right and c_left")]
    NonAdmissibleShock { u: f64, h: f64 },

    #[error("under-resolved layer: dx = {dx:e} exceeds epsilon = {epsilon:e}")]
    UnderResolvedLayer { dx: f64, epsilon: f64 },

    #[error("grid too coarse: n_cells = {n_cells} < 16")]
    GridTooCoarse { n_cells: usize },

    #[error("invalid grid: x_lo = {x_lo} must be < x_hi = {x_hi}")]
    InvalidDomain { x_lo: f64, x_hi: f64 },

    #[error("instability: u[{cell}] = {value:e} left [{lo:e}, {hi:e}] at t = {t}")]
    Instability { cell: usize, value: f64, lo: f64, hi: f64, t: f64 },

    #[error("out of domain: x = {x} outside cell-center range [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("domain too small: shift X = {x} within 5 cells of boundary [{x_lo}, {x_hi}] at t = {t}")]
    DomainTooSmall { x: f64, x_lo: f64, x_hi: f64, t: f64 },

    #[error("boundary contamination: far-field deviation {deviation:e} exceeds {threshold:e} at t = {t}")]
    BoundaryContamination { deviation: f64, threshold: f64, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolution gate: dx * max|A'| = {lhs:e} exceeds epsilon / {rho} = {rhs:e}")]
    ResolutionGate { lhs: f64, rhs: f64, rho: f64 },

    #[error("perturbation support [{support_lo}, {support_hi}] leaves the inner 80% of [{x_lo}, {x_hi}]")]
    SupportOutsideMargins {
        support_lo: f64,
        support_hi: f64,
        x_lo: f64,
        x_hi: f64,
    },

    #[error("nonpositive value in log-log fit: {what} = {value:e} at index {index}")]
    NonpositiveValue { what: &'static str, value: f64, index: usize },

    #[error("rate fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("unknown {kind} \"{name}\" (known: {known})")]
    UnknownName { kind: &'static str, name: String, known: &'static str },

    #[error("sweep failed: {0}")]
    SweepFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
