use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rank error: {0}")]
    Rank(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("membership error: {0}")]
    Membership(String),

    #[error("not in systematic normal form: {0}")]
    Structure(String),

    /// The SysNF invertibility condition fails; carries gcd(Σ b_j² + 1, N).
    #[error("SysNF condition violated: gcd(sum b_j^2 + 1, N) = {gcd}")]
    Condition { gcd: BigInt },

    #[error("modulus mismatch: expected {expected}, found {found}")]
    ModulusMismatch { expected: u64, found: u64 },

    #[error("size guard exceeded: {size} > {guard}")]
    SizeGuard { size: u128, guard: u128 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("uncompute error: {0}")]
    Uncompute(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
