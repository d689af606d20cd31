//! Relevant change points and simultaneous confidence bands for the segment
//! means of a functional time series.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`segmentation`]: CUSUM binary segmentation locates mean changes, and a
//!    sup-norm filter keeps only changes whose jump exceeds a threshold `Δ`.
//! 2. [`fts`]: segment means on the shared phase grid.
//! 3. [`lrv`]: lag-window estimate of the pointwise long-run variance.
//! 4. [`bootstrap`]: multiplier block bootstrap of the max-over-segments
//!    sup-norm statistic.
//! 5. [`bands`]: simultaneous bands `mean ± σ̂(t)·q*/√n̂`.
//!
//! [`pipeline`] chains the stages and [`simulate`] provides data generators
//! with known truth plus a Monte Carlo coverage harness.

pub mod bands;
pub mod bootstrap;
pub mod error;
pub mod fts;
pub mod lrv;
pub mod pipeline;
pub mod rng;
pub mod segmentation;
pub mod simulate;
mod tuning;

pub use error::{Error, Result};
pub use fts::{segment_mean, sup_norm, Curve, FunctionalTimeSeries, Grid, Partition, Segment, SegmentMeans};
pub use tuning::Tuning;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
