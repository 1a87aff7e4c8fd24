//! Dataset I/O: TUM and KITTI text formats, image files, probability
//! fields, and a synthetic sequence generator.

mod images;
mod kitti;
mod pfld;
mod synth;
mod tum;

use std::path::{Path, PathBuf};

pub use images::{load_color, load_depth, load_gray, load_mask, save_color, save_depth, save_gray, save_mask};
pub use kitti::{
    format_kitti_trajectory, load_trajectory_kitti, parse_kitti_trajectory, save_trajectory_kitti,
    ORTHONORMAL_TOLERANCE,
};
pub use pfld::{decode_probfield, encode_probfield, load_probfield, save_probfield, PFLD_MAGIC, RENORMALIZE_TOLERANCE};
pub use synth::{
    default_intrinsics, synth_sequence, CameraPath, SynthConfig, SynthFrame, SynthSequence, BACKGROUND_DEPTH,
    MAX_COVERAGE, OBJECT_DEPTH,
};
pub use tum::{
    associate, format_associations, format_tum_list, format_tum_trajectory, load_trajectory_tum, load_tum_list,
    parse_tum_list, parse_tum_trajectory, save_trajectory_tum, AssocPair, QUATERNION_WARN_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::geometry::Trajectory;
use crate::odometry::RgbdFrame;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Attaches the file name to a line-level parse error.
pub(crate) fn wrap_parse(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::format(path, format!("line {line}: {message}")),
        other => other,
    }
}

/// Trajectory file flavor, picked from the extension when not given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryFormat {
    Tum,
    Kitti,
}

impl TrajectoryFormat {
    /// `.kitti` files are KITTI, anything else TUM.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("kitti") => TrajectoryFormat::Kitti,
            _ => TrajectoryFormat::Tum,
        }
    }
}

impl std::str::FromStr for TrajectoryFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tum" => Ok(TrajectoryFormat::Tum),
            "kitti" => Ok(TrajectoryFormat::Kitti),
            _ => Err(Error::invalid(format!("unknown trajectory format '{s}' (tum, kitti)"))),
        }
    }
}

pub fn load_trajectory(path: impl AsRef<Path>, format: Option<TrajectoryFormat>) -> Result<Trajectory> {
    let path = path.as_ref();
    match format.unwrap_or_else(|| TrajectoryFormat::from_path(path)) {
        TrajectoryFormat::Tum => load_trajectory_tum(path),
        TrajectoryFormat::Kitti => load_trajectory_kitti(path),
    }
}

pub fn save_trajectory(path: impl AsRef<Path>, traj: &Trajectory, format: Option<TrajectoryFormat>) -> Result<()> {
    let path = path.as_ref();
    match format.unwrap_or_else(|| TrajectoryFormat::from_path(path)) {
        TrajectoryFormat::Tum => save_trajectory_tum(path, traj),
        TrajectoryFormat::Kitti => save_trajectory_kitti(path, traj),
    }
}

/// A TUM-layout sequence directory: `rgb.txt` and `depth.txt` with paths
/// relative to `root`.
#[derive(Debug, Clone)]
pub struct TumSequence {
    pub root: PathBuf,
    pub pairs: Vec<AssocPair>,
}

impl TumSequence {
    pub fn open(root: impl AsRef<Path>, max_difference: f64) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let rgb = load_tum_list(root.join("rgb.txt"))?;
        let depth = load_tum_list(root.join("depth.txt"))?;
        let pairs = associate(&rgb, &depth, max_difference, 0.0)?;
        if pairs.is_empty() {
            return Err(Error::format(
                root.join("rgb.txt"),
                "no rgb frame has a depth frame within the time limit",
            ));
        }
        Ok(Self { root, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn rgb_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.pairs[i].rgb_path)
    }

    pub fn depth_path(&self, i: usize) -> PathBuf {
        self.root.join(&self.pairs[i].depth_path)
    }

    /// Frame `i`, stamped with the RGB time.
    pub fn frame(&self, i: usize, depth_factor: f64) -> Result<RgbdFrame> {
        Ok(RgbdFrame {
            timestamp: self.pairs[i].t_rgb,
            gray: load_gray(self.rgb_path(i))?,
            depth: load_depth(self.depth_path(i), depth_factor)?,
        })
    }

    pub fn frames(&self, depth_factor: f64) -> Result<Vec<RgbdFrame>> {
        (0..self.len()).map(|i| self.frame(i, depth_factor)).collect()
    }

    /// Path of a per-frame side file such as a mask, named after the RGB
    /// image stem: `dir/<stem>.<ext>`.
    pub fn side_file(&self, i: usize, dir: &Path, ext: &str) -> PathBuf {
        let stem = self.pairs[i].rgb_path.file_stem().unwrap_or_default().to_string_lossy();
        // Timestamps contain dots, so the name is assembled by hand.
        dir.join(format!("{stem}.{ext}"))
    }
}
