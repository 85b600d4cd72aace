//! Gauge-function Hausdorff measures of nested-disc sets and their projections.

pub mod diophantine;
pub mod error;
pub mod gauge;
pub mod hierarchy;
pub mod measure;
pub mod projection;
pub mod quad;
pub mod reporting;

pub use error::{Error, Result};
