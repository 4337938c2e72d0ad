//! Line-oriented canonical records:
//!
//! ```text
//! frame_id class cx cy cz length width height yaw [score]
//! ```
//!
//! Whitespace separated, `.` decimal, one record per line. A line holding
//! only a frame id declares a frame that may have no objects. Blank lines and
//! lines starting with `#` are skipped.

use std::fmt::Write as _;

use crate::geom::Box3D;
use crate::metrics::{FrameSet, GroundTruthObject, Prediction};

use super::{parse_f64, IngestError};

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalRecord {
    pub frame_id: String,
    pub class_label: String,
    pub bbox: Box3D,
    /// Absent for ground truth.
    pub score: Option<f64>,
}

impl CanonicalRecord {
    pub fn to_line(&self) -> String {
        let b = &self.bbox;
        let mut s = format!(
            "{} {} {} {} {} {} {} {} {}",
            self.frame_id,
            self.class_label,
            b.cx(),
            b.cy(),
            b.cz(),
            b.length(),
            b.width(),
            b.height(),
            b.yaw()
        );
        if let Some(score) = self.score {
            let _ = write!(s, " {score}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedFrames {
    GroundTruth(FrameSet<GroundTruthObject>),
    Predictions(FrameSet<Prediction>),
}

impl ParsedFrames {
    /// Ground truth view. A file with only frame declarations qualifies.
    pub fn into_ground_truth(self) -> Option<FrameSet<GroundTruthObject>> {
        match self {
            ParsedFrames::GroundTruth(f) => Some(f),
            ParsedFrames::Predictions(f) if f.values().all(Vec::is_empty) => {
                Some(f.into_keys().map(|k| (k, Vec::new())).collect())
            }
            ParsedFrames::Predictions(_) => None,
        }
    }

    /// Prediction view. A file with only frame declarations qualifies.
    pub fn into_predictions(self) -> Option<FrameSet<Prediction>> {
        match self {
            ParsedFrames::Predictions(f) => Some(f),
            ParsedFrames::GroundTruth(f) if f.values().all(Vec::is_empty) => {
                Some(f.into_keys().map(|k| (k, Vec::new())).collect())
            }
            ParsedFrames::GroundTruth(_) => None,
        }
    }
}

enum Line {
    Declaration(String),
    Record(CanonicalRecord),
}

fn parse_line(text: &str, line: usize) -> Result<Option<Line>, IngestError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let tokens: Vec<&str> = trimmed.split_whitespace().collect();
    match tokens.len() {
        1 => return Ok(Some(Line::Declaration(tokens[0].to_string()))),
        9 | 10 => {}
        n => {
            return Err(IngestError::Parse {
                line,
                message: format!("expected 9 or 10 fields, found {n}"),
            })
        }
    }
    const NAMES: [&str; 7] = ["cx", "cy", "cz", "length", "width", "height", "yaw"];
    let mut v = [0.0; 7];
    for (i, name) in NAMES.iter().enumerate() {
        v[i] = parse_f64(tokens[2 + i], name, line)?;
    }
    let bbox = Box3D::new([v[0], v[1], v[2]], v[3], v[4], v[5], v[6])
        .map_err(|source| IngestError::InvalidBox { line, source })?;
    let score = tokens
        .get(9)
        .map(|t| parse_f64(t, "score", line))
        .transpose()?;
    Ok(Some(Line::Record(CanonicalRecord {
        frame_id: tokens[0].to_string(),
        class_label: tokens[1].to_string(),
        bbox,
        score,
    })))
}

/// Parses every record line, in file order. Frame declarations are dropped.
pub fn parse_canonical_records(text: &str) -> Result<Vec<CanonicalRecord>, IngestError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if let Some(Line::Record(r)) = parse_line(raw, i + 1)? {
            out.push(r);
        }
    }
    Ok(out)
}

/// Parses a whole file into frames, routing by presence of the score column.
pub fn parse_canonical(text: &str) -> Result<ParsedFrames, IngestError> {
    let mut gt: FrameSet<GroundTruthObject> = FrameSet::new();
    let mut pred: FrameSet<Prediction> = FrameSet::new();
    let mut scored: Option<bool> = None;
    let mut declared: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        match parse_line(raw, line)? {
            None => {}
            Some(Line::Declaration(id)) => declared.push(id),
            Some(Line::Record(r)) => {
                let has_score = r.score.is_some();
                match scored {
                    None => scored = Some(has_score),
                    Some(s) if s != has_score => return Err(IngestError::MixedRecords { line }),
                    _ => {}
                }
                match r.score {
                    Some(score) => pred
                        .entry(r.frame_id)
                        .or_default()
                        .push(Prediction::new(r.bbox, r.class_label, score)),
                    None => gt
                        .entry(r.frame_id)
                        .or_default()
                        .push(GroundTruthObject::new(r.bbox, r.class_label)),
                }
            }
        }
    }
    Ok(if scored == Some(true) {
        for id in declared {
            pred.entry(id).or_default();
        }
        ParsedFrames::Predictions(pred)
    } else {
        for id in declared {
            gt.entry(id).or_default();
        }
        ParsedFrames::GroundTruth(gt)
    })
}

pub fn write_canonical_gt(frames: &FrameSet<GroundTruthObject>) -> String {
    let mut out = String::new();
    for (id, objs) in frames {
        if objs.is_empty() {
            out.push_str(id);
            out.push('\n');
        }
        for o in objs {
            let rec = CanonicalRecord {
                frame_id: id.clone(),
                class_label: o.class_label.clone(),
                bbox: o.bbox,
                score: None,
            };
            out.push_str(&rec.to_line());
            out.push('\n');
        }
    }
    out
}

pub fn write_canonical_predictions(frames: &FrameSet<Prediction>) -> String {
    let mut out = String::new();
    for (id, objs) in frames {
        if objs.is_empty() {
            out.push_str(id);
            out.push('\n');
        }
        for o in objs {
            let rec = CanonicalRecord {
                frame_id: id.clone(),
                class_label: o.class_label.clone(),
                bbox: o.bbox,
                score: Some(o.score),
            };
            out.push_str(&rec.to_line());
            out.push('\n');
        }
    }
    out
}
