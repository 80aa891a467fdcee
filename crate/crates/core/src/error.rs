use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("moment offset undefined for sigma={sigma}, k={k} (gamma pole)")]
    OffsetUndefined { sigma: f64, k: f64 },
    #[error("moment of order {order} does not exist for sigma={sigma}, k={k}")]
    MomentUndefined { order: u32, sigma: f64, k: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("initialization failed: {0}")]
    Initialization(String),
    #[error("fit did not converge: {0}")]
    NotConverged(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
