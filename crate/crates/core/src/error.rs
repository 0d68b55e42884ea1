use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(&'static str),
    /// The aspect ratio `p/(n-1)` is outside `(0, 1)`, where the asymptotic
    /// calibration of the likelihood ratio tests is not available.
    Regime { gamma_tilde: f64 },
    /// A spike lies within `sqrt(gamma)` of one and a distant spike was required.
    CloseSpike { spike: f64, gamma: f64 },
    /// `log |S|` is undefined because the sample covariance has a zero eigenvalue.
    SingularCovariance,
    /// Matrix shapes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    /// Input matrix is not symmetric within tolerance.
    NotSymmetric,
    /// Covariance is not positive semidefinite.
    NotPositiveSemidefinite,
    /// A data entry is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// Too few observations for the requested operation.
    TooFewObservations { n: usize, required: usize },
    /// The eigensolver exceeded its iteration budget.
    NoConvergence,
    /// Adaptive quadrature hit its panel cap before reaching the tolerance.
    Quadrature { estimate: f64, error: f64 },
    /// A numerical invariant that holds for valid inputs was violated.
    Internal(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Regime { gamma_tilde } => write!(
                f,
                "asymptotic calibration requires p/(n-1) in (0,1), got {gamma_tilde}"
            ),
            Error::CloseSpike { spike, gamma } => write!(
                f,
                "spike {spike} is close (|a-1| <= sqrt({gamma})); distant spikes are required"
            ),
            Error::SingularCovariance => {
                f.write_str("statistic undefined: singular sample covariance")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSymmetric => f.write_str("matrix is not symmetric"),
            Error::NotPositiveSemidefinite => {
                f.write_str("covariance matrix is not positive semidefinite")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite entry at row {row}, column {col}")
            }
            Error::TooFewObservations { n, required } => {
                write!(f, "need at least {required} observations, got {n}")
            }
            Error::NoConvergence => f.write_str("symmetric eigensolver did not converge"),
            Error::Quadrature { estimate, error } => write!(
                f,
                "quadrature did not converge (estimate {estimate}, error bound {error})"
            ),
            Error::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
