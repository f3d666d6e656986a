use std::fmt;

/// Errors raised by the library. Every variant carries enough context to
/// name the offending column, tolerance, or cell in its message.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shapes disagree (lengths, row counts, square-ness).
    Dimension(String),
    /// A NaN or infinity reached an entry point.
    NonFinite(String),
    /// A design dropped below the relative rank tolerance.
    RankDeficient {
        what: String,
        tolerance: f64,
    },
    /// symmetric_eig input asymmetric beyond tolerance.
    Asymmetric {
        max_gap: f64,
        tolerance: f64,
    },
    /// A predictor column with zero variance where variation is required.
    ConstantColumn(String),
    /// Sample covariance not positive definite within tolerance.
    SingularCovariance(String),
    /// A named column is absent.
    MissingColumn(String),
    /// A generated or loaded column name collides with an existing one.
    NameClash(String),
    /// A cell that failed to parse as a number; row is the file line.
    BadCell {
        row: usize,
        column: String,
    },
    /// Empty file or empty data where rows are required.
    EmptyInput(String),
    /// Residual degrees of freedom exhausted (n - m - 1 < 1) or zero variance.
    InsufficientDof(String),
    /// Precondition on a parameter value failed.
    BadConfig(String),
    /// Exponential tilting cannot reach the requested correlation.
    TargetUnreachable {
        target: f64,
        lo: f64,
        hi: f64,
    },
    /// simulate_cov dropped more replicates than the 5% cap allows.
    TooManyExcluded {
        excluded: usize,
        replicates: usize,
    },
    Io(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite_input",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Asymmetric { .. } => "asymmetric_input",
            Error::ConstantColumn(_) => "constant_column",
            Error::SingularCovariance(_) => "singular_covariance",
            Error::MissingColumn(_) => "missing_column",
            Error::NameClash(_) => "name_clash",
            Error::BadCell { .. } => "bad_cell",
            Error::EmptyInput(_) => "empty_input",
            Error::InsufficientDof(_) => "insufficient_dof",
            Error::BadConfig(_) => "bad_config",
            Error::TargetUnreachable { .. } => "target_unreachable",
            Error::TooManyExcluded { .. } => "too_many_excluded",
            Error::Io(_) => "io",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite input: {msg}"),
            Error::RankDeficient { what, tolerance } => {
                write!(f, "{what} is rank deficient at relative tolerance {tolerance:e}")
            }
            Error::Asymmetric { max_gap, tolerance } => write!(
                f,
                "matrix asymmetric: max |A - A'| = {max_gap:e} exceeds tolerance {tolerance:e}"
            ),
            Error::ConstantColumn(name) => write!(f, "column '{name}' is constant"),
            Error::SingularCovariance(msg) => write!(f, "singular covariance: {msg}"),
            Error::MissingColumn(name) => write!(f, "column '{name}' not found"),
            Error::NameClash(name) => write!(f, "column name '{name}' already exists"),
            Error::BadCell { row, column } => {
                write!(f, "non-numeric cell at row {row}, column '{column}'")
            }
            Error::EmptyInput(msg) => write!(f, "empty input: {msg}"),
            Error::InsufficientDof(msg) => write!(f, "insufficient degrees of freedom: {msg}"),
            Error::BadConfig(msg) => write!(f, "bad configuration: {msg}"),
            Error::TargetUnreachable { target, lo, hi } => write!(
                f,
                "target correlation {target} unreachable by tilting; reachable range [{lo:.6}, {hi:.6}]"
            ),
            Error::TooManyExcluded { excluded, replicates } => write!(
                f,
                "{excluded} of {replicates} replicates excluded (path too short), above the 5% cap"
            ),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
