use thiserror::Error;

/// Every failure the core library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite input component: {0}")]
    NonFinite(&'static str),

    #[error("degenerate-omega3: |omega3|^2 = {0:e} is below the chart floor")]
    DegenerateOmega3(f64),

    #[error("division hazard: {what} = {value:e} is below the floor")]
    DivisionHazard { what: &'static str, value: f64 },

    #[error("blow-up guard tripped at t = {t}: component magnitude {magnitude:e}")]
    BlowUp { t: f64, magnitude: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("fit window invalid: {0}")]
    FitWindow(String),

    #[error("non-positive value {value:e} of {what} at t = {t} inside fit window")]
    NonPositive { what: &'static str, value: f64, t: f64 },

    #[error("fast-phase-absent: B0 = {b0:e} does not exceed B_star = {b_star:e}")]
    FastPhaseAbsent { b0: f64, b_star: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_finite(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
