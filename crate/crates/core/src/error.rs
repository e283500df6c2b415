use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("nothing to refine: the marked set is empty")]
    EmptyMarkedSet,
    #[error("invalid element id {0}")]
    InvalidElement(usize),
    #[error("degenerate triangle (area {0:.3e})")]
    DegenerateTriangle(f64),
    #[error("fem error: {0}")]
    Fem(String),
    #[error("linear solve did not reach the residual target: achieved {achieved:.3e}, required {required:.3e}")]
    SolveResidual { achieved: f64, required: f64 },
    #[error("estimator error: {0}")]
    Estimator(String),
    #[error("marking parameter theta={0} outside [0, 1]")]
    InvalidTheta(f64),
    #[error("quantum error: {0}")]
    Quantum(String),
    #[error("cannot prepare a quantum state from the zero vector")]
    ZeroStateVector,
    #[error("cannot block-encode the zero matrix")]
    ZeroMatrix,
    #[error("qubit count mismatch: {0}")]
    QubitMismatch(String),
    #[error("shots must be positive")]
    ZeroShots,
    #[error("quantum paths require real DOF vectors (max imaginary magnitude {0:.3e})")]
    ComplexAmplitudes(f64),
    #[error("vqls error: {0}")]
    Vqls(String),
    #[error("norm estimate denominator too small (|<F|A|x>| = {0:.3e})")]
    NormDenominator(f64),
    #[error("VQLS solver refused: {dofs} DOFs exceed the {budget}-qubit budget ({max} amplitudes)")]
    QubitBudget { dofs: usize, budget: usize, max: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
