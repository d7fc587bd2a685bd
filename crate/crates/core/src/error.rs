use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation too small: tail mass {tail_mass:.3e} above n = {cutoff} exceeds {tolerance:e} (n_max = {n_max})")]
    TruncationTooSmall {
        n_max: usize,
        cutoff: usize,
        tail_mass: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("k range [{k_min}, {k_max}] too small: retained probability mass {mass:.12}")]
    KRangeTooSmall { k_min: i64, k_max: i64, mass: f64 },

    #[error("Wigner grid too small: |W| = {boundary:.3e} on the boundary")]
    GridTooSmall { boundary: f64 },

    #[error("Wigner grid not normalized: integral = {integral:.6}")]
    UnnormalizedGrid { integral: f64 },

    #[error("degenerate cat: |beta| = {beta_mag}, phi = {phi} gives |beta> = |beta*>")]
    DegenerateCat { beta_mag: f64, phi: f64 },

    #[error("every quadrature node failed; first error: {first}")]
    AllNodesFailed { first: Box<Error> },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by an inadequate Fock-space or electron-ladder cutoff.
    pub fn is_truncation(&self) -> bool {
        match self {
            Error::TruncationTooSmall { .. } | Error::KRangeTooSmall { .. } => true,
            Error::AllNodesFailed { first } => first.is_truncation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
