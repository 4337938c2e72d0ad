//! KITTI object labels (camera frame) and calibration files.

use crate::geom::Box3D;

use super::canonical::CanonicalRecord;
use super::{parse_f64, IngestError};

type Mat3 = [[f64; 3]; 3];

const ORTHONORMAL_TOL: f64 = 1e-6;

/// Rectification and LiDAR→camera extrinsics, plus their inverses.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiCalib {
    rect: Mat3,
    rect_inv: Mat3,
    velo_rot: Mat3,
    velo_rot_inv: Mat3,
    velo_trans: [f64; 3],
}

fn mat_vec(m: &Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn det(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse(m: &Mat3) -> Mat3 {
    let d = det(m);
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // cofactor of m[j][i]
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *cell = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    }
    inv
}

fn check_rotation(name: &str, m: &Mat3) -> Result<(), IngestError> {
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| m[i][k] * m[j][k]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > ORTHONORMAL_TOL {
                return Err(IngestError::Calib(format!(
                    "{name} rotation is not orthonormal (row {i}·row {j} = {dot})"
                )));
            }
        }
    }
    if det(m) <= 0.0 {
        return Err(IngestError::Calib(format!("{name} rotation is a reflection")));
    }
    Ok(())
}

impl KittiCalib {
    /// `rect` is R0_rect; `velo_to_cam` is the row-major 3×4 `Tr_velo_to_cam`.
    pub fn new(rect: Mat3, velo_to_cam: [[f64; 4]; 3]) -> Result<Self, IngestError> {
        let velo_rot: Mat3 = [0, 1, 2].map(|i| [velo_to_cam[i][0], velo_to_cam[i][1], velo_to_cam[i][2]]);
        let velo_trans = [velo_to_cam[0][3], velo_to_cam[1][3], velo_to_cam[2][3]];
        if rect.iter().flatten().chain(velo_to_cam.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(IngestError::Calib("non-finite matrix entry".into()));
        }
        check_rotation("R0_rect", &rect)?;
        check_rotation("Tr_velo_to_cam", &velo_rot)?;
        Ok(Self {
            rect,
            rect_inv: inverse(&rect),
            velo_rot,
            velo_rot_inv: inverse(&velo_rot),
            velo_trans,
        })
    }

    /// Nominal KITTI axes: camera x = -LiDAR y, camera y = -LiDAR z,
    /// camera z = LiDAR x; no rectification or offset.
    pub fn nominal() -> Self {
        Self::new(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [
                [0.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, -1.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
            ],
        )
        .expect("nominal calibration is valid")
    }

    /// Parses a KITTI calib file. `Tr_velo_to_cam` is required; `R0_rect`
    /// defaults to identity when absent. Other keys are ignored.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut rect: Option<Mat3> = None;
        let mut tr: Option<[[f64; 4]; 3]> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let Some((key, values)) = raw.split_once(':') else {
                if raw.trim().is_empty() {
                    continue;
                }
                return Err(IngestError::Parse {
                    line,
                    message: "expected `key: values`".into(),
                });
            };
            let key = key.trim();
            let want = match key {
                "R0_rect" | "R_rect" => 9,
                "Tr_velo_to_cam" | "Tr_velo_cam" => 12,
                _ => continue,
            };
            let nums = values
                .split_whitespace()
                .map(|t| parse_f64(t, key, line))
                .collect::<Result<Vec<f64>, _>>()?;
            if nums.len() != want {
                return Err(IngestError::Parse {
                    line,
                    message: format!("{key} needs {want} values, found {}", nums.len()),
                });
            }
            if want == 9 {
                rect = Some([0, 1, 2].map(|r| [nums[3 * r], nums[3 * r + 1], nums[3 * r + 2]]));
            } else {
                tr = Some([0, 1, 2].map(|r| {
                    [nums[4 * r], nums[4 * r + 1], nums[4 * r + 2], nums[4 * r + 3]]
                }));
            }
        }
        let tr = tr.ok_or_else(|| IngestError::Calib("missing Tr_velo_to_cam".into()))?;
        let rect = rect.unwrap_or([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        Self::new(rect, tr)
    }

    /// Rectified-camera point to LiDAR frame.
    pub fn rect_to_lidar(&self, p: [f64; 3]) -> [f64; 3] {
        let cam = mat_vec(&self.rect_inv, p);
        let shifted = [
            cam[0] - self.velo_trans[0],
            cam[1] - self.velo_trans[1],
            cam[2] - self.velo_trans[2],
        ];
        mat_vec(&self.velo_rot_inv, shifted)
    }

    /// LiDAR point to rectified-camera frame.
    pub fn lidar_to_rect(&self, p: [f64; 3]) -> [f64; 3] {
        let cam = mat_vec(&self.velo_rot, p);
        mat_vec(
            &self.rect,
            [
                cam[0] + self.velo_trans[0],
                cam[1] + self.velo_trans[1],
                cam[2] + self.velo_trans[2],
            ],
        )
    }

    pub fn rect_dir_to_lidar(&self, d: [f64; 3]) -> [f64; 3] {
        mat_vec(&self.velo_rot_inv, mat_vec(&self.rect_inv, d))
    }

    pub fn lidar_dir_to_rect(&self, d: [f64; 3]) -> [f64; 3] {
        mat_vec(&self.rect, mat_vec(&self.velo_rot, d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KittiLabels {
    pub records: Vec<CanonicalRecord>,
    /// Rows with non-positive dimensions (typically `DontCare`) that were
    /// skipped.
    pub dropped: usize,
}

/// Converts one KITTI label file into canonical records for `frame_id`.
///
/// Location is the bottom center in rectified camera coordinates; it is
/// mapped to LiDAR and raised by half the height. `ry` (rotation about the
/// camera's downward y axis) becomes the LiDAR heading of the box's forward
/// axis.
pub fn parse_kitti_label(
    text: &str,
    calib: &KittiCalib,
    frame_id: &str,
) -> Result<KittiLabels, IngestError> {
    const NAMES: [&str; 15] = [
        "truncated", "occluded", "alpha", "left", "top", "right", "bottom", "h", "w", "l", "x",
        "y", "z", "ry", "score",
    ];
    let mut records = Vec::new();
    let mut dropped = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 15 && tokens.len() != 16 {
            return Err(IngestError::Parse {
                line,
                message: format!("expected 15 or 16 columns, found {}", tokens.len()),
            });
        }
        let mut v = [0.0; 15];
        for (k, tok) in tokens[1..].iter().enumerate() {
            v[k] = parse_f64(tok, NAMES[k], line)?;
        }
        let (h, w, l) = (v[7], v[8], v[9]);
        if h <= 0.0 || w <= 0.0 || l <= 0.0 {
            dropped += 1;
            continue;
        }
        let bottom = calib.rect_to_lidar([v[10], v[11], v[12]]);
        let ry = v[13];
        let forward = calib.rect_dir_to_lidar([ry.cos(), 0.0, -ry.sin()]);
        let yaw = forward[1].atan2(forward[0]);
        let bbox = Box3D::new([bottom[0], bottom[1], bottom[2] + 0.5 * h], l, w, h, yaw)
            .map_err(|source| IngestError::InvalidBox { line, source })?;
        records.push(CanonicalRecord {
            frame_id: frame_id.to_string(),
            class_label: tokens[0].to_string(),
            bbox,
            score: (tokens.len() == 16).then_some(v[14]),
        });
    }
    Ok(KittiLabels { records, dropped })
}
