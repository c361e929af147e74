use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A lattice or operator description violates one of its invariants.
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("operator dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("unknown symmetry kind `{0}`")]
    UnknownSymmetry(String),

    #[error("symmetry `{kind}` is not defined on this basis: {reason}")]
    UnsupportedSymmetry { kind: String, reason: String },

    /// The eigensolver failed or produced eigenpairs that do not pass the
    /// residual certificate. Near an exceptional point this is expected.
    #[error(
        "eigendecomposition failed for dim {dim}: {reason} \
         (max residual {max_residual:.3e}, max |H_ij| {max_entry:.3e})"
    )]
    Eigensolver {
        dim: usize,
        reason: String,
        max_residual: f64,
        max_entry: f64,
    },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No eigenstate satisfies the reference-state selection rule.
    #[error("no reference state candidate: {0}")]
    NoReferenceState(String),

    #[error("state too close to the truncation edge: {0}")]
    EdgeState(String),

    #[error("projection unavailable: {0}")]
    Projection(String),

    #[error("zero-norm state: {0}")]
    ZeroNorm(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// The electron pair lattice is not reflection symmetric about x = y.
    #[error("reflection symmetry violated: ||H - S H S|| = {0:.3e}")]
    ReflectionSymmetry(f64),

    #[error("time integration failed: {0}")]
    Integrator(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than
    /// by numerics or I/O.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidLattice(_)
                | Error::InvalidArgument(_)
                | Error::UnknownSymmetry(_)
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
