use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pole of the Gamma function at z = {0}")]
    GammaPole(f64),

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("quadrature budget exceeded: estimate {estimate:.3e}, error {error:.3e} after {evals} evaluations")]
    QuadratureBudget { estimate: f64, error: f64, evals: usize },

    #[error("contour truncated at t = {t_max}: integrand still {residual:.3e}")]
    ContourTruncation { t_max: f64, residual: f64 },

    #[error("xi = 0 is outside the contour representation; use green_at_origin")]
    XiZero,

    #[error("negative density {value:.3e} at {at}")]
    NegativeDensity { value: f64, at: f64 },

    #[error("negative price {0:.3e}")]
    NegativePrice(f64),

    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("theta = {theta} is outside the diamond |theta| <= {bound}")]
    ThetaOutsideDiamond { theta: f64, bound: f64 },

    #[error("martingale check failed: relative deviation {0:.3e}")]
    Martingale(f64),

    #[error("point {x} lies outside the grid [{lo}, {hi}]")]
    OutsideGrid { x: f64, lo: f64, hi: f64 },

    #[error("grid is not symmetric and uniform: {0}")]
    GridNotSymmetric(String),

    #[error("variance of the hedge instrument vanishes")]
    VanishingVariance,

    #[error("{found} out-of-the-money quotes, at least {needed} required")]
    InsufficientQuotes { found: usize, needed: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Schema { expected: String, found: String },

    #[error("line {line}: spot/rate/dividend differ from earlier rows of {date}")]
    InconsistentDay { line: usize, date: String },

    #[error("file contains no data rows")]
    EmptyFile,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag, stable across versions.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GammaPole(_) => "gamma_pole",
            Error::NonConvergence { .. } => "non_convergence",
            Error::QuadratureBudget { .. } => "quadrature_budget",
            Error::ContourTruncation { .. } => "contour_truncation",
            Error::XiZero => "xi_zero",
            Error::NegativeDensity { .. } => "negative_density",
            Error::NegativePrice(_) => "negative_price",
            Error::Domain(_) => "domain",
            Error::ThetaOutsideDiamond { .. } => "theta_outside_diamond",
            Error::Martingale(_) => "martingale",
            Error::OutsideGrid { .. } => "outside_grid",
            Error::GridNotSymmetric(_) => "grid_not_symmetric",
            Error::VanishingVariance => "vanishing_variance",
            Error::InsufficientQuotes { .. } => "insufficient_quotes",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::InconsistentDay { .. } => "inconsistent_day",
            Error::EmptyFile => "empty_file",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
