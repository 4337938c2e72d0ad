//! Readers and writers: canonical record lines, KITTI labels and calibration,
//! raw point clouds, and AP reports.

mod canonical;
mod kitti;
mod pointcloud;
mod report_io;

pub use canonical::{
    parse_canonical, parse_canonical_records, write_canonical_gt, write_canonical_predictions,
    CanonicalRecord, ParsedFrames,
};
pub use kitti::{parse_kitti_label, KittiCalib, KittiLabels};
pub use pointcloud::{read_pointcloud, write_pointcloud, Point, PointCloud, POINT_RECORD_BYTES};
pub use report_io::{parse_report_csv, write_report, CsvReportRow, ReportFormat, CSV_HEADER};

use thiserror::Error;

use crate::geom::GeomError;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: scored and unscored records mixed in one file")]
    MixedRecords { line: usize },
    #[error("line {line}: {source}")]
    InvalidBox { line: usize, source: GeomError },
    #[error("calibration: {0}")]
    Calib(String),
    #[error("point cloud length {len} bytes is not a multiple of {POINT_RECORD_BYTES}")]
    TruncatedPointCloud { len: usize },
    #[error("point {index} (byte offset {offset}) has a non-finite field")]
    NonFinitePoint { index: usize, offset: usize },
}

/// Parses one whitespace token as a finite `f64`.
pub(crate) fn parse_f64(token: &str, field: &str, line: usize) -> Result<f64, IngestError> {
    let v: f64 = token.parse().map_err(|_| IngestError::Parse {
        line,
        message: format!("field `{field}`: `{token}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(IngestError::Parse {
            line,
            message: format!("field `{field}`: `{token}` is not finite"),
        });
    }
    Ok(v)
}
