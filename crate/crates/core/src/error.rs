use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not degree-preserving (degree shift {0})")]
    NotDegreePreserving(i32),

    #[error("block at degree {degree} is singular")]
    SingularBlock { degree: i32 },

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("zero is a Pollicott-Ruelle resonance of the toy model")]
    ZeroResonance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("interaction has no term of degree {0}")]
    MissingInteraction(usize),

    #[error("interaction tensor of degree {degree} is not symmetric (defect {defect:e})")]
    NotSymmetric { degree: usize, defect: f64 },

    #[error("series does not converge at requested order (norm {norm:e})")]
    NonConvergent { norm: f64 },

    #[error("not Anosov: eigenvalue on the unit circle")]
    NotAnosov,

    #[error("sieve produced a non-integer prime-orbit count at period {period}")]
    SieveInconsistent { period: u32 },

    #[error("non-transverse orbit: |det(I - P^j)| = {det:e} below threshold")]
    NonTransverse { det: f64 },

    #[error("line {line}: {message}")]
    SpectrumRow { line: u64, message: String },

    #[error("i/o: {0}")]
    Io(String),

    #[error("IR divergence: lambda-regularization required (min Re(mu + lambda) = {min_re:e})")]
    IrDivergence { min_re: f64 },

    #[error("branch cut: Re(mu + lambda) = {re:e} <= 0")]
    BranchCut { re: f64 },

    #[error("|hbar| = {hbar:e} outside the Taylor radius {radius:e}; evaluate the closed form directly")]
    OutsideRadius { hbar: f64, radius: f64 },

    #[error("operator does not leave im(iota) invariant (defect {defect:e})")]
    NotInvariant { defect: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
