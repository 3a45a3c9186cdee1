use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("velocity {speed} outside the search box of half-width {bound}")]
    VelocityOutOfBox { speed: f64, bound: f64 },

    #[error("momentum grid too narrow: maximizer on the boundary for v = {velocity}")]
    Truncation { velocity: f64 },

    #[error("sublevel set {{H <= {level}}} is empty on every sampled point")]
    NoSublevel { level: f64 },

    #[error("Lagrangian is not superlinear on the sampled box: {0}")]
    NotSuperlinear(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "value iteration did not converge in {iterations} sweeps (last residual {residual:e})"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("Peierls window did not stabilize: residual {residual:e} exceeds {tol:e} (critical shift off?)")]
    UnstableBarrier { residual: f64, tol: f64 },

    #[error("projected Aubry set is empty at eps = {eps:e}")]
    EmptyAubrySet { eps: f64 },

    #[error("no node satisfies |L(y,0) + c| <= {eps:e}")]
    EmptyMatherSupport { eps: f64 },

    #[error("operation requires a mechanical Lagrangian")]
    NotMechanical,

    #[error("linear program infeasible: {0}")]
    Infeasible(String),

    #[error("linear program unbounded")]
    Unbounded,

    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),

    #[error("singular basis during refactorization")]
    SingularBasis,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path}: {reason}")]
    Format { path: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
