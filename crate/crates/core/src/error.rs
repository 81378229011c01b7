use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Choi matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("map is not unital completely positive (cp defect {cp_defect:.3e}, unital defect {unital_defect:.3e})")]
    NotUcp { cp_defect: f64, unital_defect: f64 },

    #[error("word closure did not stabilize within degree {max_degree} (dimension {dimension})")]
    NonStabilized { max_degree: usize, dimension: usize, partial: Box<crate::opsys::AlgebraBasis> },

    #[error("constraint system is infeasible: {0}")]
    Infeasible(String),

    #[error("element is not an isometry: V*V = I fails")]
    NotIsometry,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
