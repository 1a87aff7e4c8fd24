//! KITTI odometry pose files: one row-major 3x4 `[R|t]` per line.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::{read_text, wrap_parse};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Trajectory};

/// Largest accepted entry of `R^T R - I`.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-4;

/// Poses get frame indices `0, 1, 2, ...` as timestamps.
pub fn parse_kitti_trajectory(text: &str) -> Result<Trajectory> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: n,
                        message: format!("'{t}' is not a finite number"),
                    })
            })
            .collect::<Result<_>>()?;
        if v.len() != 12 {
            return Err(Error::Parse {
                line: n,
                message: format!("expected 12 values, found {}", v.len()),
            });
        }
        let r = Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]);
        let dev = (r.transpose() * r - Matrix3::identity()).abs().max();
        if dev > ORTHONORMAL_TOLERANCE {
            return Err(Error::Parse {
                line: n,
                message: format!("rotation is not orthonormal (deviation {dev:.2e})"),
            });
        }
        if r.determinant() <= 0.0 {
            return Err(Error::Parse {
                line: n,
                message: "rotation block is a reflection".into(),
            });
        }
        let t = Vector3::new(v[3], v[7], v[11]);
        // Nearest rotation, so rows written with nine decimals read back to
        // the rotation they were rounded from.
        let rot = Rotation3::from_matrix_eps(&r, 1e-15, 100, Rotation3::from_matrix_unchecked(r));
        entries.push((
            entries.len() as f64,
            Pose::new(UnitQuaternion::from_rotation_matrix(&rot), t),
        ));
    }
    Trajectory::new(entries)
}

pub fn load_trajectory_kitti(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    parse_kitti_trajectory(&read_text(path)?).map_err(|e| wrap_parse(path, e))
}

/// Nine decimals, with values that round to zero printed unsigned.
fn fmt_fixed(v: f64) -> String {
    let s = format!("{v:.9}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        "0.000000000".to_string()
    } else {
        s
    }
}

/// Nine decimals per value. Reading the text back can move the last digit
/// by one, since the rotation passes through a quaternion. Timestamps are
/// not stored.
pub fn format_kitti_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    for (_, p) in traj.entries() {
        let r = p.rotation_matrix();
        let t = p.translation();
        let row: Vec<String> = (0..3)
            .flat_map(|i| [r[(i, 0)], r[(i, 1)], r[(i, 2)], t[i]])
            .map(fmt_fixed)
            .collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn save_trajectory_kitti(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_kitti_trajectory(traj)).map_err(|e| Error::io(path, e))
}
