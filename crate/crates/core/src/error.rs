use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown preset `{name}` (valid: {valid})")]
    UnknownPreset { name: String, valid: String },

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParameters(Vec<String>),

    #[error("pole of the response at ω = {omega:e} rad/s (|d(ω)| = {magnitude:e})")]
    Pole { omega: f64, magnitude: f64 },

    #[error("singular linearized system at ω = {omega:e} rad/s")]
    SingularSystem { omega: f64 },

    #[error("root residual {residual:e} exceeds tolerance {tolerance:e}")]
    RootResidual { residual: f64, tolerance: f64 },

    #[error("eigenvalue solver failed for degree-{degree} polynomial")]
    Eigen { degree: usize },

    #[error("at omega/omega_m = {omega_over_omega_m}: {source}")]
    AtGridPoint {
        omega_over_omega_m: f64,
        source: Box<Error>,
    },

    #[error("no EIT dip: {0}")]
    NoDip(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("steady state is unstable (max Im root = {margin:e} rad/s)")]
    Unstable { margin: f64 },

    #[error("self-consistent detuning is ambiguous: stable roots {0:?} rad/s")]
    AmbiguousDetuning(Vec<f64>),

    #[error("no stable self-consistent detuning among roots {0:?} rad/s")]
    NoStableDetuning(Vec<f64>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
