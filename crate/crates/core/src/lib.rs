//! Multi-omics regression of tumor-volume change.
//!
//! The crate covers the whole pipeline: 3D volumes and image filters
//! ([`volume`]), radiomic/dosiomic and delta features ([`features`]),
//! variance/correlation filtering plus Lasso ranking under repeated
//! cross-validation ([`selection`]), ε-SVR with four kernels
//! ([`regression`]), metrics and statistics ([`evaluation`]) and the
//! file-based orchestration used by the CLI ([`pipeline`]).
//!
//! Heavy loops run on rayon when the default `parallel` feature is on;
//! every result is merged in a fixed order, so sequential and parallel runs
//! give identical output.

pub mod error;
pub mod evaluation;
pub mod features;
pub mod fsutil;
pub mod par;
pub mod pipeline;
pub mod selection;
pub mod regression;
pub mod rng;
pub mod volume;

pub use error::{Error, Result};
