use thiserror::Error;

/// Errors surfaced by the library's numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    /// beta = E / sinh((E/2)(t - t0)) has a pole at the breaking time.
    #[error("beta is undefined at the breaking time t0 = {t0}")]
    BetaUndefinedAtBreaking { t0: f64 },

    /// Transformed fields are defined for eta strictly inside (0, upper).
    #[error("eta = {eta} outside the open interval (0, {upper})")]
    EtaOutOfRange { eta: f64, upper: f64 },

    /// Operation needs positive total energy.
    #[error("zero solution: total energy C = 0")]
    ZeroSolution,

    /// A time step produced a state that is no longer admissible.
    #[error("step rejected at t = {t}: y_xi + H_xi <= 0 at node {node}")]
    StepRejected { t: f64, node: usize },

    /// Pseudo-inverse target lies outside the sampled range.
    #[error("target {target} outside sampled range [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    /// Two discretizations that must share a grid do not.
    #[error("grid mismatch: {left} vs {right} nodes")]
    GridMismatch { left: usize, right: usize },

    /// Scaled-system operators need A > 0.
    #[error("zero energy: A = 0 has no operator fields")]
    ZeroEnergy,

    /// P dropped below the positivity floor; the source terms divide by sqrt(P).
    #[error("degenerate pressure: min P = {min_p} below floor {floor}")]
    DegeneratePressure { min_p: f64, floor: f64 },

    /// Semi-Lagrangian step guard: dt * max|v| must stay under half a cell.
    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    /// Figure id not in the supported set.
    #[error("unknown figure id '{id}'")]
    UnknownFigure { id: String },

    /// A snapshot or state failed its structural invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Filesystem failure while reading a config or emitting report files.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
