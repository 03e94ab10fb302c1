use thiserror::Error;

/// Errors raised by validation and by the bound and optimizer routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type so the
/// error stays `Clone + Send` and printable without generics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle {value} at index {index} is outside [0, pi/2]")]
    InvalidAngles { index: usize, value: f64 },
    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("expected {expected} priors, got {got}")]
    PriorCount { expected: usize, got: usize },
    #[error("prior {value} at index {index} is not strictly positive")]
    NonPositivePrior { index: usize, value: f64 },
    #[error("priors must sum to 1 (prior-sum invariant), got {sum}")]
    PriorSum { sum: f64 },
    #[error("gram matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("gram matrix is not symmetric: |g[{i}][{j}] - g[{j}][{i}]| = {deviation}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },
    #[error("gram matrix diagonal entry {index} is {value}, expected 1")]
    NotUnitDiagonal { index: usize, value: f64 },
    #[error("gram matrix entry [{i}][{j}] = {value} is outside [-1, 1]")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },
    #[error("gram matrix is not positive semidefinite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("invalid copy counts: need 1 <= M < N, got M={m}, N={n}")]
    InvalidCopies { m: u32, n: u32 },
    #[error("overlap [{i}][{j}] = {value} is negative; bounds are undefined for negative overlaps")]
    NegativeOverlap { i: usize, j: usize, value: f64 },
    #[error("degenerate spherical triangle: sin b * sin c = {product}")]
    DegenerateTriangle { product: f64 },
    #[error("invalid spherical triangle with sides ({a}, {b}, {c})")]
    InvalidTriangle { a: f64, b: f64, c: f64 },
    #[error("not a unit vector: norm {norm}")]
    NotUnit { norm: f64 },
    #[error("operation needs exactly {expected} states, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("bounds require uniform priors")]
    NonUniformPriors,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("rank of the M-copy gram ({rank_m}) exceeds rank of the N-copy gram ({rank_n})")]
    RankInfeasible { rank_m: usize, rank_n: usize },
    #[error("brute-force oracle needs at most 4 parameters, task has {0}")]
    TooLarge(usize),
    #[error("matrix rows are not orthonormal (deviation {deviation})")]
    NotOrthonormal { deviation: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("restarts must be at least 1")]
    NoRestarts,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
