use thiserror::Error;

/// Errors surfaced by the factorization and series kernels.
#[derive(Debug, Error)]
pub enum Error {
    /// A triangular matrix with a zero diagonal entry cannot be inverted.
    #[error("singular matrix: zero diagonal entry at row {row}")]
    SingularMatrix { row: u64 },

    /// The Hadamard inverse s_{n,k}^(-1)(f) divides by f~(d) = sum_{e|d} f_e.
    #[error("f~({d}) = 0: Hadamard inverse sequence undefined (division by zero divisor sum)")]
    ZeroDivisorSum { d: u64 },

    /// Convolution inverse needs G_L(q)/q to have an invertible constant term.
    #[error("g(1) = 0: convolution inverse undefined (G_L(q)/q has zero constant term)")]
    ZeroLeadingConvolution,

    /// Reciprocal of a power series with zero constant term does not exist.
    #[error("series has zero constant term and no reciprocal")]
    NonInvertibleSeries,

    /// The zeta series only converge for s > 1.
    #[error("zeta series diverges for s = {s} (requires s > 1)")]
    ZetaDivergent { s: i64 },

    /// The inner sum of the omega formula must be a power of two; anything
    /// else means the implementation broke the identity.
    #[error("omega identity violation at n = {n}: inner sum {value} is not a power of two")]
    OmegaIdentityViolation { n: u64, value: String },

    /// Enumeration-scale oracle called outside its supported range.
    #[error("combinatorial oracle supports 1 <= k <= n <= {max}, got n = {n}, k = {k}")]
    OracleRange { n: u64, k: u64, max: u64 },

    /// Unknown name passed to the arithmetic-function registry.
    #[error("unknown arithmetic function '{name}' (expected one, id, mu, phi, sigma1, delta1, npow:k)")]
    UnknownFunction { name: String },

    /// Bad CLI / config parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
