use thiserror::Error;

/// Errors raised by the bound calculators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("constraint system is infeasible: {0}")]
    Infeasible(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),
}

pub type Result<T> = std::result::Result<T, QkdError>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(QkdError::Domain {
            name,
            value,
            domain,
        })
    }
}
