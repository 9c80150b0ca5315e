use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("free group rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("generator names must be distinct non-empty identifiers")]
    BadGeneratorNames,
    #[error("unknown generator index {index} (rank {rank})")]
    UnknownGenerator { index: usize, rank: usize },
    #[error("cannot parse word token `{0}`")]
    BadWordToken(String),
    #[error("word uses generator {index} but the representation has rank {rank}")]
    GroupMismatch { index: usize, rank: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge within the iteration cap")]
    EigenConvergence,
    #[error("matrix has non-finite entries")]
    NonFiniteMatrix,
    #[error("index k={k} out of range 1..={max}")]
    IndexOutOfRange { k: usize, max: usize },
    #[error("logarithmic gap at k={k} is singular: lambda_(k+1) vanishes")]
    SingularGap { k: usize },
    #[error("matrix is singular within tolerance")]
    SingularMatrix,
    #[error("matrix is not proximal at k={k}")]
    NotProximal { k: usize },
    #[error("eigenvalue magnitudes tie across position k={k} within tolerance")]
    TieAmbiguous { k: usize },

    #[error("decomposition must have positive total dimension")]
    EmptyDecomposition,
    #[error("matrix is not block upper triangular for this decomposition")]
    NotBlockUpperTriangular,
    #[error("matrix is not block diagonal for this decomposition")]
    NotBlockDiagonal,
    #[error("block {block} has |det| = {det:.6e}, not 1 within tolerance")]
    NotBlockNormalized { block: usize, det: f64 },
    #[error("deformation vector violates the weighted zero-sum relation (residual {residual:.3e})")]
    BadDeformVector { residual: f64 },
    #[error("image of generator {index} is singular")]
    SingularImage { index: usize },
    #[error("declared structure `{declared}` fails verification: {reason}")]
    StructureMismatch { declared: String, reason: String },

    #[error("theta member {k} out of range for dimension {d}")]
    BadTheta { k: usize, d: usize },
    #[error("flag signature does not match the requested theta set")]
    SignatureMismatch,
    #[error("configuration table is not admissible")]
    NotAdmissible,
    #[error("no (i, j) pair available for k={k}; admissible configurations always have one")]
    EmptyPairSet { k: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("certification hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("non-positive constraint bound {bound:.3e} from class `{word}` (i={i}, j={j}, k={k}); configuration inconsistent")]
    NonPositiveBound {
        word: String,
        i: usize,
        j: usize,
        k: usize,
        bound: f64,
    },
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    UnboundedProgram,
    #[error("simplex exceeded its pivot cap; this indicates a numerical failure")]
    SimplexStall,
    #[error("operation supports reduced dimension <= {max}, got {got}")]
    UnsupportedDimension { max: usize, got: usize },

    #[error("eigensolver failed on class `{word}`: {message}")]
    SampleFailure { word: String, message: String },
    #[error("internal spectral error: {0}")]
    InternalSpectral(String),
}

pub type Result<T> = std::result::Result<T, Error>;
