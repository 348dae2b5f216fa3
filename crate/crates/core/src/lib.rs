//! Desk-scale crop-growth pipeline.
//!
//! Three legs, sharing one crate:
//!
//! 1. **Leaf area from images**: green-region segmentation over binary PPM
//!    rasters ([`segment`], [`image`]), synthetic oracle scenes ([`scene`]),
//!    and calibrated pixel-to-cm^2 conversion with distance adjustment
//!    ([`measure`]).
//! 2. **Growth models**: allometric power laws fitted in log-log space
//!    ([`allometry`]) and OLS / conjugate Bayesian linear regression with
//!    splitting and metrics ([`regress`]).
//! 3. **Telemetry**: a line-oriented TCP wire format, ingestion server,
//!    simulated sensor nodes, append-only stores, and the hourly-to-daily
//!    feature join ([`telemetry`]).
//!
//! Everything outside the server is a pure function over immutable inputs.
//! The `parallel` feature (default) runs the per-pixel hot loops on rayon;
//! disabling it falls back to identical sequential code.

pub mod allometry;
pub mod date;
pub mod error;
pub mod image;
mod linalg;
pub mod measure;
pub mod regress;
pub mod rng;
pub mod scene;
pub mod segment;
pub mod telemetry;

pub use error::{Error, Result};
