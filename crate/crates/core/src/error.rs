use thiserror::Error;

use crate::lp::LpStatus;

/// Errors raised anywhere in the screening pipeline.
#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("constant predictor column(s): {}", .0.join(", "))]
    ConstantColumns(Vec<String>),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("LP solver failed at delta = {delta}: status {status:?}")]
    SolverFailure { delta: f64, status: LpStatus },

    #[error("cannot stratify into {folds} folds: class {class} has only {count} member(s); try fewer folds")]
    StratificationInfeasible {
        folds: usize,
        class: u8,
        count: usize,
    },

    #[error("AUC undefined: labels contain a single class")]
    UndefinedAuc,

    #[error("logistic refit failed: {0}")]
    RefitFailed(String),

    #[error("no admissible grid point: every delta selects more than {cap} variables; raise the cap or refine the grid")]
    NoAdmissibleDelta { cap: usize },

    #[error("brute-force search found no feasible point at this resolution")]
    InfeasibleAtResolution,

    #[error("bad input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ScreenError {
    /// Process exit code: 2 bad input, 3 solver failure, 4 degenerate data.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScreenError::SolverFailure { .. }
            | ScreenError::RefitFailed(_)
            | ScreenError::InfeasibleAtResolution => 3,
            ScreenError::DegenerateData(_) | ScreenError::NoAdmissibleDelta { .. } => 4,
            _ => 2,
        }
    }

    /// Short stable tag used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            ScreenError::InvalidArgument(_) => "invalid-argument",
            ScreenError::Domain(_) => "domain",
            ScreenError::ConstantColumns(_) => "constant-columns",
            ScreenError::DegenerateData(_) => "degenerate-data",
            ScreenError::SolverFailure { .. } => "solver-failure",
            ScreenError::StratificationInfeasible { .. } => "stratification-infeasible",
            ScreenError::UndefinedAuc => "undefined-auc",
            ScreenError::RefitFailed(_) => "refit-failed",
            ScreenError::NoAdmissibleDelta { .. } => "no-admissible-delta",
            ScreenError::InfeasibleAtResolution => "infeasible-at-resolution",
            ScreenError::BadInput(_) => "bad-input",
            ScreenError::Io(_) => "io",
            ScreenError::Csv(_) => "csv",
            ScreenError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, ScreenError>;
