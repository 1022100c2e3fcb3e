use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch ({left_rows}x{left_cols} vs {right_rows}x{right_cols})")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("operator of dimension {dim} does not factor as {dim1} x {dim2}")]
    FactorizationMismatch { dim: usize, dim1: usize, dim2: usize },

    #[error("matrix shape {rows}x{cols} needs {expected} entries, got {found}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },

    #[error("matrix must be non-empty")]
    EmptyMatrix,

    #[error("matrix entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: |U^dag U - I|_F = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("unitary {index} of the ensemble is invalid: {source}")]
    InvalidKraus {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ensemble must contain at least one unitary")]
    EmptyEnsemble,

    #[error("{what}: dimension {requested} exceeds the cap {cap} ({hint})")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("zig-zag requires G1 to be dim(G2)-regular: G2 has dimension {g2_dim} but G1 has degree {g1_degree}")]
    Regularity { g1_degree: usize, g2_dim: usize },

    #[error("base expander must have dim = degree^8, got dim {dim} with degree {degree}")]
    BaseShape { dim: usize, degree: usize },

    #[error("generator set is empty")]
    EmptyGenerators,

    #[error("unitary net is empty")]
    EmptyNet,

    #[error("exhaustive search over {tuples} tuples exceeds the budget of {budget}")]
    BudgetExceeded { tuples: u128, budget: u128 },

    #[error("map does not preserve diagonal operators (off-diagonal mass {leak:.3e})")]
    NotDiagonalPreserving { leak: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}
