use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible pilot: training length {tp} is shorter than the {nt} transmit antennas")]
    InfeasiblePilot { nt: usize, tp: usize },

    #[error("zero-forcing needs nr >= nt (got nt = {nt}, nr = {nr})")]
    ZfRequiresTallChannel { nt: usize, nr: usize },

    #[error("zero-forcing deterministic equivalent needs beta > 1 (got {0})")]
    ZfBetaOne(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),
}

impl Error {
    pub fn is_accuracy(&self) -> bool {
        matches!(self, Error::Accuracy(_))
    }
}
