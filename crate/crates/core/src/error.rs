use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the domain of {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("phantom component {index} is not contained in the open disc of radius {radius}")]
    PhantomOutsideDisc { index: usize, radius: f64 },

    #[error("lattice sum {value:e} is below the Riesz lower-bound guard")]
    DegenerateLatticeSum { value: f64 },

    #[error("generator {0} has no forward path for this operation")]
    UnsupportedGenerator(&'static str),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
