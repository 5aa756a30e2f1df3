use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: S_{0} vs S_{1}")]
    DegreeMismatch(usize, usize),

    #[error("rank {rank} out of range for S_{degree}")]
    RankOutOfRange { rank: usize, degree: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degree {degree} exceeds the multiplication table cap {cap}")]
    TableDegree { degree: usize, cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("ring context mismatch: Z_{0}[S_{1}] vs Z_{2}[S_{3}]")]
    ContextMismatch(u32, usize, u32, usize),

    #[error("shape mismatch: {0}x{0} vs {1}x{1}")]
    ShapeMismatch(usize, usize),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("coefficient {value} out of range for modulus {modulus}")]
    Coefficient { value: u64, modulus: u32 },

    #[error("encoding: {0}")]
    Encoding(String),

    #[error("key file: {0}")]
    KeyFile(String),

    #[error("exponent must be at least 1")]
    ZeroExponent,

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("memory budget exceeded: {needed} stored entries > cap {cap}")]
    MemoryBudget { needed: u64, cap: u64 },

    #[error("challenge: {0}")]
    Challenge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
