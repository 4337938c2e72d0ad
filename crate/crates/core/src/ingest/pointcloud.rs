use super::IngestError;

/// Bytes per point: four little-endian `f32` (x, y, z, intensity).
pub const POINT_RECORD_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn read_pointcloud(bytes: &[u8]) -> Result<PointCloud, IngestError> {
    if !bytes.len().is_multiple_of(POINT_RECORD_BYTES) {
        return Err(IngestError::TruncatedPointCloud { len: bytes.len() });
    }
    let mut points = Vec::with_capacity(bytes.len() / POINT_RECORD_BYTES);
    for (index, chunk) in bytes.chunks_exact(POINT_RECORD_BYTES).enumerate() {
        let f = |k: usize| f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap());
        let p = Point {
            x: f(0),
            y: f(1),
            z: f(2),
            intensity: f(3),
        };
        if ![p.x, p.y, p.z, p.intensity].iter().all(|v| v.is_finite()) {
            return Err(IngestError::NonFinitePoint {
                index,
                offset: index * POINT_RECORD_BYTES,
            });
        }
        points.push(p);
    }
    Ok(PointCloud { points })
}

pub fn write_pointcloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * POINT_RECORD_BYTES);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_two_points() {
        assert!(read_pointcloud(&[]).unwrap().is_empty());
        let cloud = PointCloud {
            points: vec![
                Point { x: 1.0, y: -2.0, z: 0.5, intensity: 0.3 },
                Point { x: 80.0, y: 0.0, z: -1.5, intensity: 0.0 },
            ],
        };
        let bytes = write_pointcloud(&cloud);
        assert_eq!(bytes.len(), 32);
        assert_eq!(read_pointcloud(&bytes).unwrap(), cloud);
    }

    #[test]
    fn truncated_and_nan() {
        assert!(matches!(
            read_pointcloud(&[0u8; 17]),
            Err(IngestError::TruncatedPointCloud { len: 17 })
        ));
        let mut bytes = write_pointcloud(&PointCloud {
            points: vec![Point { x: 0.0, y: 0.0, z: 0.0, intensity: 0.0 }; 3],
        });
        bytes[2 * 16 + 4..2 * 16 + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            read_pointcloud(&bytes),
            Err(IngestError::NonFinitePoint { index: 2, offset: 32 })
        ));
    }
}
