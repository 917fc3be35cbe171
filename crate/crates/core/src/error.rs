use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("fields live on different grids or have incompatible channel counts")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("non-finite integrand sample at x = {x}, alpha = {alpha}")]
    NonFiniteIntegrand { x: f64, alpha: f64 },

    #[error("degenerate chord between x = {x1} and x = {x2} (|chord| = {chord:e})")]
    DegenerateChord { x1: f64, x2: f64, chord: f64 },

    #[error("singular resolvent at xi = {xi}, tau = {tau}")]
    SingularResolvent { xi: f64, tau: f64 },

    #[error("kernel spectrum has not decayed: tail {tail:e} at the highest mode, need about {required_modes} modes")]
    InsufficientDecay { tail: f64, required_modes: usize },

    #[error(
        "symbol violates coercivity at xi = {xi}, t = {t}: min eigenvalue {min_eig:e} < {bound:e}"
    )]
    Coercivity {
        xi: f64,
        t: f64,
        min_eig: f64,
        bound: f64,
    },

    #[error("tension law rejected: {0}")]
    InvalidTension(String),

    #[error("run aborted at t = {t}: {reason}")]
    Aborted { t: f64, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
