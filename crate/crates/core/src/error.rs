use thiserror::Error;

/// Errors produced by the numerical machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not a weight: {0}")]
    WeightClass(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("root not bracketed: F({lo:e}) = {f_lo:e}, F({hi:e}) = {f_hi:e}, target {target:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        target: f64,
    },

    #[error("total mass {total} equals 2^{m}; x_{m} has no finite solution (pass allow_degenerate to drop index {m})")]
    DegenerateMass { total: f64, m: i32 },

    #[error("degenerate problem: every candidate gives 0/0")]
    DegenerateProblem,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Bracket { .. }
                | Error::DegenerateMass { .. }
                | Error::DegenerateProblem
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
