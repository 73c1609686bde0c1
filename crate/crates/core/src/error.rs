use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("operator is not a projector (max |P^2 - P| = {deviation:.3e})")]
    NotProjector { deviation: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("trace drifted by {drift:.3e} at integration step {step}")]
    TraceDrift { step: usize, drift: f64 },

    #[error("negative jump rate {0}")]
    NegativeRate(f64),

    #[error("clip {0} has no outgoing edges")]
    NoOutgoingEdges(String),

    #[error("walk was not absorbed by an action clip within {hops} hops")]
    NotAbsorbed { hops: usize },

    #[error("walk must start at a percept clip, got {0}")]
    NotAPercept(String),

    #[error("unknown clip {0}")]
    UnknownClip(String),

    #[error("invalid weight {weight} on edge {edge}: {reason}")]
    InvalidWeight { edge: String, weight: f64, reason: String },

    #[error("invalid learning parameter: {0}")]
    InvalidParams(String),

    #[error("malformed adjacency line {line}: {reason}")]
    AdjacencyParse { line: usize, reason: String },

    #[error("fock construction supports at most {max} clips, got {requested}")]
    FockDimensionCap { max: usize, requested: usize },

    #[error("amplitude decay requires a vacuum state in the basis")]
    MissingVacuum,

    #[error("index {index} out of range (limit {limit}) for {what}")]
    IndexOutOfRange { what: &'static str, index: usize, limit: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("deliberation failed: all action probabilities vanish at t* = {t_star}")]
    DeliberationFailure { t_star: f64 },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("ragged ensemble: {0}")]
    RaggedEnsemble(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config is missing required key `{0}`")]
    MissingConfigKey(&'static str),

    #[error("agent {agent}, trial {trial}: {source}")]
    Agent {
        agent: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed curve csv line {line}: {reason}")]
    CurveParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
