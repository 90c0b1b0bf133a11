use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hermite order {order} exceeds the configured cap {cap}")]
    OrderOverflow { order: usize, cap: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("binomial domain error: n = {n} > nu = {nu}")]
    BinomialDomain { nu: usize, n: usize },

    #[error("|alpha|^2 + |beta|^2 = {norm_sqr} deviates from 1 by more than {tolerance}")]
    NotNormalized { norm_sqr: f64, tolerance: f64 },

    #[error("alpha and beta are both zero")]
    DegenerateParams,

    #[error("invalid frequency ratio p = {p}, q = {q}: {reason}")]
    InvalidRatio { p: u32, q: u32, reason: &'static str },

    #[error("frequency ratios differ: {bra:?} vs {ket:?}")]
    RatioMismatch { bra: (u32, u32), ket: (u32, u32) },

    #[error("operation is only defined for the isotropic ratio p = q = 1, got p = {p}, q = {q}")]
    AnisotropicUnsupported { p: u32, q: u32 },

    #[error("cross-parameter overlap of anisotropic Schrodinger states has no closed form here; use the coefficient inner product")]
    AnisotropicCrossOverlap,

    #[error("truncation must keep at least one term")]
    EmptyTruncation,

    #[error("operator spaces do not match: {left:?} vs {right:?}")]
    SpaceMismatch { left: (usize, usize), right: (usize, usize) },

    #[error("mode ({n}, {m}) lies outside the truncated space (n <= {n_max}, m <= {m_max})")]
    OutsideSpace { n: usize, m: usize, n_max: usize, m_max: usize },

    #[error("Fock cutoff {cutoff} too small for |Psi|^2 = {mean}: Poisson tail {tail:e} >= {limit:e}")]
    CutoffTooSmall { cutoff: usize, mean: f64, tail: f64, limit: f64 },

    #[error("expectation of a Hermitian operator has imaginary part {0:e}")]
    NotReal(f64),

    #[error("zero-norm state vector")]
    ZeroNorm,

    #[error("under-resolved quadrature: {0}")]
    UnderResolved(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
