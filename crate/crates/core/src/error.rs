use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("kernel row (s={s}, x={x}) sums to {sum}, expected 1")]
    RowSum { s: usize, x: usize, sum: f64 },

    #[error("kernel entry N(y={y}|x={x},s={s}) = {value} is outside [0,1]")]
    KernelEntry { s: usize, x: usize, y: usize, value: f64 },

    #[error("state probability P_S({s}) = {value} is not strictly positive")]
    StateNotPositive { s: usize, value: f64 },

    #[error("state distribution sums to {0}, expected 1")]
    StateSum(f64),

    #[error("invalid probability vector: {0}")]
    Distribution(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("noise parameter p = {0} is outside [0,1]")]
    NoiseParameter(f64),

    #[error("invalid input constraints: {0}")]
    Constraints(String),

    #[error("channel is not a (binary-input, deterministic) graph channel: {0}")]
    NotGraphChannel(String),

    #[error("arrow is undefined for coinciding angles ({0})")]
    CoincidingAngles(f64),

    #[error("{what} = {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("search exceeded its node budget of {0}")]
    SearchBudget(u64),

    #[error("invalid B-KS set: {0}")]
    BksSet(String),

    #[error("quantum dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("blahut-arimoto did not reach gap {tol} in {iterations} iterations (capacity in [{lower}, {upper}])")]
    NotConverged {
        iterations: usize,
        lower: f64,
        upper: f64,
        tol: f64,
    },

    #[error("channel JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
