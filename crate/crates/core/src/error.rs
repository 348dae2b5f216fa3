//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::telemetry::wire::RejectReason;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("ppm parse error at byte {offset}: {reason}")]
    PpmParse { offset: usize, reason: String },

    #[error("dimension mismatch: image is {image_width}x{image_height}, mask is {mask_width}x{mask_height}")]
    DimensionMismatch {
        image_width: u32,
        image_height: u32,
        mask_width: u32,
        mask_height: u32,
    },

    #[error("shape #{index} does not fit the {width}x{height} canvas")]
    ShapeOutOfCanvas {
        index: usize,
        width: u32,
        height: u32,
    },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid green band: {0}")]
    InvalidBand(String),

    #[error("{what}: need at least {need}, got {got}")]
    TooFewItems {
        what: &'static str,
        need: usize,
        got: usize,
    },

    #[error("pair #{index} is not strictly positive: ({y2}, {y1})")]
    NonPositivePair { index: usize, y2: f64, y1: f64 },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("design matrix is rank deficient: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid node id {node_id:?}: tabs, newlines, and empty ids are not allowed")]
    InvalidNodeId { node_id: String },

    #[error("invalid reading: {0}")]
    InvalidReading(RejectReason),

    #[error("rejected line {line:?}: {reason}")]
    Reject { reason: RejectReason, line: String },

    #[error("{path}:{line}: {reason}")]
    StoreLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{what} parse error at line {line}: {reason}")]
    Format {
        what: &'static str,
        line: usize,
        reason: String,
    },

    #[error("invalid date {input:?}: expected YYYY-MM-DD")]
    DateParse { input: String },

    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },

    #[error("tare {tare_g} g exceeds measured weight {measured_g} g")]
    TareExceedsMeasured { measured_g: f64, tare_g: f64 },

    #[error("no readings found for: {}", dates.join(", "))]
    MissingReadings { dates: Vec<String> },

    #[error("duplicate plant record for {plant_id} on {date}")]
    DuplicatePlantDate { plant_id: String, date: String },

    #[error("could not connect to {addr} after {attempts} attempts: {last}")]
    ConnectFailed {
        addr: String,
        attempts: usize,
        last: String,
    },

    #[error("server sink failed: {0}")]
    SinkFailed(String),
}
