use thiserror::Error;

use crate::dyadic::DyadicArc;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("arc {arc} lies beyond the authoritative depth {depth} of the measure")]
    BeyondAuthoritativeDepth { arc: DyadicArc, depth: u32 },

    #[error("refinement of arc {arc} would exceed the maximum depth {max_depth}")]
    DepthCap { arc: DyadicArc, max_depth: u32 },

    #[error("cannot certify the transform error below the requested tolerance; limiting leaf {arc}")]
    Uncertifiable { arc: DyadicArc },

    #[error("point {re} + {im}i is not an admissible disc point: {reason}")]
    OutsideDisc { re: f64, im: f64, reason: &'static str },

    #[error("majorant ineligible: {0}")]
    IneligibleMajorant(String),

    #[error("closed set has full measure at generation {level}")]
    MeasureZeroViolation { level: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BlochError>;
