use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration parse error: {0}")]
    Parse(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("degenerate amplitudes: {0}")]
    DegenerateAmplitude(String),

    #[error("singular point: g_sigma_sigma = {value} at (tau, sigma) = ({tau}, {sigma}) is below the singular tolerance")]
    SingularPoint { tau: f64, sigma: f64, value: f64 },

    #[error("unsupported configuration shape: {0}")]
    UnsupportedShape(String),

    #[error("extrapolation did not converge: {0}")]
    NonConvergence(String),

    #[error("integral {value} is not near an integer (deviation {deviation} > tolerance {tolerance})")]
    NotNearInteger {
        value: f64,
        deviation: f64,
        tolerance: f64,
    },
}
