use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::metrics::{ApReport, Difficulty, MetricKind, PrPoint};

use super::IngestError;

pub const CSV_HEADER: &str = "metric,difficulty,ap,gt_count,prediction_count";

/// Rendering of an AP cell with no ground truth.
pub const UNDEFINED_CELL: &str = "—";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Metric rows × difficulty columns, one decimal place.
    Table,
    /// One row per (metric, difficulty) with full-precision AP.
    Csv,
    /// JSON with configuration and full PR curves.
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" | "text" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            "json" | "json-like" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown report format `{s}` (expected table, csv, json-like)")),
        }
    }
}

pub fn write_report(report: &ApReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Table => table(report).into_bytes(),
        ReportFormat::Csv => csv(report).into_bytes(),
        ReportFormat::Json => json(report).into_bytes(),
    }
}

fn table(report: &ApReport) -> String {
    let cfg = &report.config;
    let mut out = String::new();
    let d = cfg.difficulty_depths;
    let _ = writeln!(
        out,
        "{} AP (R{}) | IoU {} box / {} dim | depth <= {}/{}/{} m",
        cfg.target_class,
        cfg.recall_points.count(),
        cfg.box_iou_threshold,
        cfg.dim_iou_threshold,
        d[0],
        d[1],
        d[2]
    );
    let _ = writeln!(out, "{:<12}{:>10}{:>10}{:>10}", "Metric", "Easy", "Moderate", "Hard");
    for &kind in report.metrics() {
        let _ = write!(out, "{:<12}", kind.label());
        for diff in Difficulty::ALL {
            let cell = match report.ap(kind, diff) {
                Some(ap) => format!("{ap:.1}"),
                None => UNDEFINED_CELL.to_string(),
            };
            let _ = write!(out, "{cell:>10}");
        }
        out.push('\n');
    }
    let counts: Vec<String> = Difficulty::ALL
        .iter()
        .map(|d| {
            report
                .cells
                .iter()
                .find(|c| c.difficulty == *d)
                .map_or(0, |c| c.gt_count)
                .to_string()
        })
        .collect();
    let _ = writeln!(out, "{:<12}{:>10}{:>10}{:>10}", "GT count", counts[0], counts[1], counts[2]);
    out
}

fn csv(report: &ApReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in &report.cells {
        let ap = c.ap.map_or(UNDEFINED_CELL.to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.metric, c.difficulty, ap, c.gt_count, c.prediction_count
        );
    }
    out
}

#[derive(Serialize)]
struct JsonCell<'a> {
    metric: MetricKind,
    difficulty: Difficulty,
    ap: Option<f64>,
    gt_count: usize,
    prediction_count: usize,
    curve: &'a [PrPoint],
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a crate::metrics::EvalConfig,
    cells: Vec<JsonCell<'a>>,
}

fn json(report: &ApReport) -> String {
    let doc = JsonReport {
        config: &report.config,
        cells: report
            .cells
            .iter()
            .map(|c| JsonCell {
                metric: c.metric,
                difficulty: c.difficulty,
                ap: c.ap,
                gt_count: c.gt_count,
                prediction_count: c.prediction_count,
                curve: &c.curve.points,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvReportRow {
    pub metric: MetricKind,
    pub difficulty: Difficulty,
    pub ap: Option<f64>,
    pub gt_count: usize,
    pub prediction_count: usize,
}

/// Reads back the CSV produced by [`write_report`].
pub fn parse_report_csv(text: &str) -> Result<Vec<CsvReportRow>, IngestError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(IngestError::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.trim().split(',').collect();
        let err = |message: String| IngestError::Parse { line, message };
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let ap = if f[2] == UNDEFINED_CELL {
            None
        } else {
            Some(f[2].parse::<f64>().map_err(|_| err(format!("bad ap `{}`", f[2])))?)
        };
        rows.push(CsvReportRow {
            metric: f[0].parse().map_err(err)?,
            difficulty: f[1].parse().map_err(err)?,
            ap,
            gt_count: f[3].parse().map_err(|_| err(format!("bad gt_count `{}`", f[3])))?,
            prediction_count: f[4]
                .parse()
                .map_err(|_| err(format!("bad prediction_count `{}`", f[4])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Box3D;
    use crate::metrics::{evaluate, EvalConfig, FrameSet, GroundTruthObject, Prediction};

    fn report(with_far: bool) -> ApReport {
        let mut gt = FrameSet::new();
        let mut pr = FrameSet::new();
        let x = if with_far { 50.0 } else { 10.0 };
        let b = Box3D::new([x, 0.0, 0.8], 4.0, 1.8, 1.6, 0.0).unwrap();
        gt.insert("0".to_string(), vec![GroundTruthObject::new(b, "Car")]);
        pr.insert("0".to_string(), vec![Prediction::new(b, "Car", 0.7)]);
        evaluate(&gt, &pr, &EvalConfig::default()).unwrap()
    }

    #[test]
    fn table_cells() {
        let text = String::from_utf8(write_report(&report(false), ReportFormat::Table)).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 2 + 7 + 1);
        for row in &rows[2..9] {
            assert_eq!(row.matches("100.0").count(), 3, "{row}");
        }
        let text = String::from_utf8(write_report(&report(true), ReportFormat::Table)).unwrap();
        assert!(text.lines().nth(2).unwrap().contains(UNDEFINED_CELL));
    }

    #[test]
    fn csv_round_trip() {
        let r = report(true);
        let text = String::from_utf8(write_report(&r, ReportFormat::Csv)).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        let rows = parse_report_csv(&text).unwrap();
        assert_eq!(rows.len(), r.cells.len());
        for (row, cell) in rows.iter().zip(&r.cells) {
            assert_eq!((row.metric, row.difficulty, row.ap), (cell.metric, cell.difficulty, cell.ap));
            assert_eq!(row.gt_count, cell.gt_count);
        }
        assert!(parse_report_csv("nope\n").is_err());
    }

    #[test]
    fn json_carries_curves_and_nulls() {
        let text = String::from_utf8(write_report(&report(true), ReportFormat::Json)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 21);
        assert!(cells[0]["ap"].is_null());
        assert_eq!(cells[1]["curve"][0]["precision"], 1.0);
        assert_eq!(v["config"]["box_iou_threshold"], 0.7);
    }
}
