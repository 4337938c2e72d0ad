use serde::{Deserialize, Serialize};

use crate::geom::Dimension;
use crate::kv::KvMap;
use crate::metrics::{FrameSet, GroundTruthObject};

use super::HarmonizeError;

/// Spread assigned to built-in profiles, as a fraction of each mean.
pub const DEFAULT_RELATIVE_SPREAD: f64 = 0.18;

/// Mean car size (width, height, length in meters) per dataset.
pub const BUILTIN_PROFILES: [(&str, [f64; 3]); 5] = [
    ("kitti", [1.62, 1.53, 3.89]),
    ("argoverse", [1.96, 1.69, 4.51]),
    ("nuscenes", [1.96, 1.73, 4.64]),
    ("lyft", [1.91, 1.71, 4.73]),
    ("waymo", [2.11, 1.79, 4.80]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetProfile {
    pub name: String,
    pub mean_width: f64,
    pub mean_height: f64,
    pub mean_length: f64,
    /// Standard deviations.
    pub spread_width: f64,
    pub spread_height: f64,
    pub spread_length: f64,
}

impl DatasetProfile {
    pub fn new(name: impl Into<String>, means: [f64; 3], spreads: [f64; 3]) -> Result<Self, HarmonizeError> {
        let p = Self {
            name: name.into(),
            mean_width: means[0],
            mean_height: means[1],
            mean_length: means[2],
            spread_width: spreads[0],
            spread_height: spreads[1],
            spread_length: spreads[2],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), HarmonizeError> {
        let means = [self.mean_width, self.mean_height, self.mean_length];
        let spreads = [self.spread_width, self.spread_height, self.spread_length];
        if means.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(HarmonizeError::InvalidConfig(format!(
                "profile `{}`: means must be positive, got {means:?}",
                self.name
            )));
        }
        if spreads.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(HarmonizeError::InvalidConfig(format!(
                "profile `{}`: spreads must be nonnegative, got {spreads:?}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn mean(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Width => self.mean_width,
            Dimension::Height => self.mean_height,
            Dimension::Length => self.mean_length,
        }
    }

    pub fn spread(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Width => self.spread_width,
            Dimension::Height => self.spread_height,
            Dimension::Length => self.spread_length,
        }
    }

    /// Same means, each spread set to `fraction` of its mean.
    pub fn with_relative_spread(&self, fraction: f64) -> Self {
        Self {
            spread_width: fraction * self.mean_width,
            spread_height: fraction * self.mean_height,
            spread_length: fraction * self.mean_length,
            ..self.clone()
        }
    }

    pub fn to_kv(&self) -> KvMap {
        let mut m = KvMap::default();
        m.insert("name", &self.name);
        m.insert("mean_width", self.mean_width);
        m.insert("mean_height", self.mean_height);
        m.insert("mean_length", self.mean_length);
        m.insert("spread_width", self.spread_width);
        m.insert("spread_height", self.spread_height);
        m.insert("spread_length", self.spread_length);
        m
    }

    pub fn from_kv(m: &KvMap) -> Result<Self, HarmonizeError> {
        m.deny_unknown(&[
            "name",
            "mean_width",
            "mean_height",
            "mean_length",
            "spread_width",
            "spread_height",
            "spread_length",
        ])?;
        Self::new(
            m.get_str("name")?,
            [m.get("mean_width")?, m.get("mean_height")?, m.get("mean_length")?],
            [m.get("spread_width")?, m.get("spread_height")?, m.get("spread_length")?],
        )
    }
}

/// Built-in profile by lowercase dataset name, with
/// [`DEFAULT_RELATIVE_SPREAD`] spreads.
pub fn builtin_profile(name: &str) -> Option<DatasetProfile> {
    BUILTIN_PROFILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, [w, h, l])| DatasetProfile {
            name: n.to_string(),
            mean_width: *w,
            mean_height: *h,
            mean_length: *l,
            spread_width: 0.0,
            spread_height: 0.0,
            spread_length: 0.0,
        }
        .with_relative_spread(DEFAULT_RELATIVE_SPREAD))
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    (mean, var.sqrt())
}

/// Mean and population standard deviation of width, height and length over
/// every `class_label` object.
pub fn size_statistics(
    name: &str,
    gt_frames: &FrameSet<GroundTruthObject>,
    class_label: &str,
) -> Result<DatasetProfile, HarmonizeError> {
    let boxes: Vec<_> = gt_frames
        .values()
        .flatten()
        .filter(|o| o.class_label == class_label)
        .map(|o| o.bbox)
        .collect();
    if boxes.is_empty() {
        return Err(HarmonizeError::EmptyInput(format!(
            "no `{class_label}` objects to compute size statistics from"
        )));
    }
    let stat = |f: fn(&crate::geom::Box3D) -> f64| {
        let v: Vec<f64> = boxes.iter().map(f).collect();
        mean_and_std(&v)
    };
    let (mw, sw) = stat(|b| b.width());
    let (mh, sh) = stat(|b| b.height());
    let (ml, sl) = stat(|b| b.length());
    DatasetProfile::new(name, [mw, mh, ml], [sw, sh, sl])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeGap {
    pub width: f64,
    pub height: f64,
    pub length: f64,
}

/// `100 (source − target) / target` per dimension, where source is the
/// training dataset and target the evaluation dataset.
pub fn percentage_gap(source: &DatasetProfile, target: &DatasetProfile) -> SizeGap {
    let gap = |s: f64, t: f64| 100.0 * (s - t) / t;
    SizeGap {
        width: gap(source.mean_width, target.mean_width),
        height: gap(source.mean_height, target.mean_height),
        length: gap(source.mean_length, target.mean_length),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Box3D;

    fn frames(sizes: &[(f64, f64, f64)]) -> FrameSet<GroundTruthObject> {
        let mut f = FrameSet::new();
        for (i, (w, h, l)) in sizes.iter().enumerate() {
            let b = Box3D::new([i as f64, 0.0, h / 2.0], *l, *w, *h, 0.0).unwrap();
            f.insert(format!("{i}"), vec![GroundTruthObject::new(b, "Car")]);
        }
        f
    }

    #[test]
    fn single_box_statistics() {
        let p = size_statistics("x", &frames(&[(1.62, 1.53, 3.89)]), "Car").unwrap();
        assert_eq!((p.mean_width, p.mean_height, p.mean_length), (1.62, 1.53, 3.89));
        assert_eq!((p.spread_width, p.spread_height, p.spread_length), (0.0, 0.0, 0.0));
    }

    #[test]
    fn two_point_statistics() {
        let p = size_statistics("x", &frames(&[(1.5, 1.5, 4.0), (1.7, 1.5, 4.0)]), "Car").unwrap();
        assert!((p.mean_width - 1.6).abs() < 1e-12);
        assert!((p.spread_width - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            size_statistics("x", &FrameSet::new(), "Car"),
            Err(HarmonizeError::EmptyInput(_))
        ));
    }

    #[test]
    fn builtin_gaps() {
        let w = builtin_profile("waymo").unwrap();
        let k = builtin_profile("kitti").unwrap();
        let g = percentage_gap(&w, &k);
        assert!((g.width - 30.2).abs() < 0.05);
        assert!((g.height - 17.0).abs() < 0.05);
        assert!((g.length - 23.4).abs() < 0.05);
        let zero = percentage_gap(&k, &k);
        assert_eq!((zero.width, zero.height, zero.length), (0.0, 0.0, 0.0));
        // not antisymmetric in magnitude
        let back = percentage_gap(&k, &w);
        assert!((back.width + g.width).abs() > 1.0);
        assert!(builtin_profile("carla").is_none());
    }

    #[test]
    fn profile_kv_round_trip() {
        let p = builtin_profile("nuscenes").unwrap();
        let back = DatasetProfile::from_kv(&KvMap::parse(&p.to_kv().to_text()).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(DatasetProfile::new("bad", [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        assert!(DatasetProfile::new("bad", [1.0, 1.0, 1.0], [-0.1, 0.0, 0.0]).is_err());
    }
}
