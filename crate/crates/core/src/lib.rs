//! Cross-domain evaluation toolkit for LiDAR 3D car detection.
//!
//! Alongside the usual 3D and bird's-eye-view AP this crate computes
//! side-view (X-Z) and front-view (Y-Z) silhouette AP and per-dimension
//! (length, width, height) AP. These separate which box dimension a detector
//! gets wrong when it moves between datasets. It also ships the dataset
//! harmonization transforms, per-dataset size profiles, and a box-level
//! simulator of a size-overfit detector.

pub mod exec;
pub mod geom;
pub mod harmonize;
pub mod ingest;
pub mod kv;
pub mod metrics;
pub mod simulate;

pub use exec::Execution;
