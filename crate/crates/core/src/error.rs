use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: argument {value} outside the domain")]
    Domain { op: &'static str, value: f64 },
    #[error("{op}: no convergence after {iters} iterations")]
    NonConvergence { op: &'static str, iters: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown item index {item} (instance has {m} items)")]
    UnknownItem { item: usize, m: usize },
    #[error("enumeration needs {needed} assignments, limit is {limit}")]
    EnumerationLimit { needed: f64, limit: usize },
    #[error("reserve of item {item} is infeasible: relative gap {eta} >= 1")]
    InfeasibleReserve { item: usize, eta: f64 },
    #[error("valuation is not XOS-representable here: {0}")]
    NotXos(String),
    #[error("expectation not computable: {0}")]
    NonIntegrable(String),
    #[error("profile is not a product of independent components")]
    NotProduct,
    #[error("unknown construction `{0}`")]
    UnknownConstruction(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
