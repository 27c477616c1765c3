use thiserror::Error;

use crate::topology::FapId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band [{lower}, {upper}) Hz: upper edge must exceed lower edge")]
    EmptyBand { lower: u64, upper: u64 },

    #[error("invalid frequency plan: {0}")]
    InvalidPlan(String),

    #[error("sector index {index} out of range for {n_sectors} sectors")]
    SectorOutOfRange { index: usize, n_sectors: usize },

    #[error("position coincides with the macro base station")]
    AtBaseStation,

    #[error("position ({x}, {y}) lies outside the macrocell disc of radius {radius} m")]
    OutsideMacro { x: f64, y: f64, radius: f64 },

    #[error("scenario B packing infeasible: placed {placed} of {requested} FAPs after {attempts} attempts")]
    InfeasiblePacking {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    #[error("invalid deployment parameters: {0}")]
    InvalidDeployment(String),

    #[error("unknown FAP {0}")]
    UnknownFap(FapId),

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("invalid propagation parameters: {0}")]
    InvalidPropagation(String),

    #[error("channel sample has {got} interferer draws, expected {expected}")]
    MissingFading { expected: usize, got: usize },

    #[error("mean desired power must be positive, got {0} W")]
    NonPositiveSignal(f64),

    #[error("invalid outage configuration: {0}")]
    InvalidOutageConfig(String),

    #[error("scheme {0} has no edge-band structure to configure")]
    NoEdgeStructure(crate::spectrum::Scheme),

    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("malformed deployment CSV: {0}")]
    DeploymentCsv(String),

    #[error("malformed event record: {0}")]
    EventRecord(String),

    #[error("event replay failed: {0}")]
    Replay(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad user input (configuration or
    /// parameters) rather than by a failing run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptyBand { .. }
                | Error::InvalidPlan(_)
                | Error::InvalidDeployment(_)
                | Error::InvalidPropagation(_)
                | Error::InvalidOutageConfig(_)
                | Error::ConfigParse { .. }
                | Error::InvalidConfig(_)
        )
    }
}
