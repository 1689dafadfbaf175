use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("incomplete moment structure: {0}")]
    IncompleteMoments(String),

    #[error("no admissible window constant: {0}")]
    NoAdmissibleWindow(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("degenerate studentizer: {0}")]
    DegenerateStudentizer(String),

    #[error("weight-sum denominator is zero")]
    ZeroDenominator,

    #[error("autoregressive fit failed: {0}")]
    Fit(String),

    #[error("memory estimation failed: {0}")]
    Estimation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("runtime budget of {0:.1}s exceeded")]
    RuntimeBudget(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that invalidate a single Monte Carlo replication rather than the run.
    pub fn is_replication_local(&self) -> bool {
        matches!(
            self,
            Error::DegenerateData(_)
                | Error::NoAdmissibleWindow(_)
                | Error::DegenerateVariance(_)
                | Error::DegenerateStudentizer(_)
                | Error::ZeroDenominator
                | Error::Fit(_)
                | Error::Estimation(_)
        )
    }
}
