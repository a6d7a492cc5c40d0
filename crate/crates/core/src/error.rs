use thiserror::Error;

/// Failure of a global solver on a particular measurement subset.
///
/// Recoverable: RANSAC and the exhaustive oracle routinely hit degenerate
/// subsets and simply move on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("design matrix of the selected rows is rank deficient")]
    RankDeficient,
    #[error("degenerate point configuration (collinear or coincident points)")]
    DegenerateConfiguration,
    #[error("fewer than {required} measurements selected ({got})")]
    NotEnoughMeasurements { got: usize, required: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("only {inliers} inliers remain, the solver needs {required}")]
    TooFewInliers { inliers: usize, required: usize },

    #[error("global solver failed: {0}")]
    SolverDegenerate(#[from] SolverError),

    #[error("measurement index {index} out of range for {count} measurements")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("duplicate measurement index {index}")]
    DuplicateIndex { index: usize },

    #[error("residual of measurement {index} is {value}, expected a finite non-negative value")]
    NonFiniteResidual { index: usize, value: f64 },

    #[error("problem has {measurements} measurements, the solver needs at least {required}")]
    ProblemTooSmall { measurements: usize, required: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("r(O) = {r_outliers} exceeds r(empty) = {r_empty}")]
    InvalidResiduals { r_empty: f64, r_outliers: f64 },

    #[error("exhaustive search over {measurements} measurements exceeds the cap of {cap}")]
    InstanceTooLarge { measurements: usize, cap: usize },

    #[error("no rejection leaving at least {min_measurements} measurements satisfies the outlier-free bound")]
    Infeasible { min_measurements: usize },

    #[error("every sampled subset was degenerate")]
    NoValidSample,

    #[error("target size {target} exceeds the {available} available points")]
    TargetTooLarge { target: usize, available: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
