use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use mavo_core::crf::BinaryMask;
use mavo_core::datasets::{load_mask, save_trajectory, TrajectoryFormat, TumSequence};
use mavo_core::evaluate::DEFAULT_MAX_DIFF;
use mavo_core::features::FeatureParams;
use mavo_core::odometry::{track_sequence, CameraIntrinsics, TrackingParams};
use rayon::prelude::*;

use crate::config::{load_config, ConfigArg};
use crate::files::{find_with_stem, require_dir, stem_of, IMAGE_EXTENSIONS};

/// Optional per-dataset calibration read by `track`, written by `synth`.
pub const CAMERA_FILE: &str = "camera.cfg";

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct TrackArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// TUM-layout sequence directory containing rgb.txt and depth.txt.
    #[arg(long, value_name = "DIR")]
    pub dataset: PathBuf,
    /// Directory of per-frame movable masks named after the rgb images.
    #[arg(long, value_name = "DIR")]
    pub masks: Option<PathBuf>,
    /// Output trajectory file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Output format; `.kitti` files default to kitti, others to tum.
    #[arg(long)]
    pub format: Option<TrajectoryFormat>,
    /// Largest rgb/depth timestamp difference when pairing frames, seconds.
    #[arg(long, default_value_t = DEFAULT_MAX_DIFF)]
    pub max_diff: f64,
    /// Focal length x; falls back to the dataset's camera.cfg, then 525.
    #[arg(long)]
    pub fx: Option<f64>,
    #[arg(long)]
    pub fy: Option<f64>,
    #[arg(long)]
    pub cx: Option<f64>,
    #[arg(long)]
    pub cy: Option<f64>,
    /// Raw depth units per meter.
    #[arg(long)]
    pub depth_factor: Option<f64>,
    /// Keypoints per frame.
    #[arg(long, default_value_t = 1000)]
    pub nfeatures: usize,
    #[arg(long, default_value_t = 1.2)]
    pub scale_factor: f64,
    #[arg(long, default_value_t = 8)]
    pub nlevels: usize,
    #[arg(long, default_value_t = 20)]
    pub ini_th_fast: u8,
    #[arg(long, default_value_t = 7)]
    pub min_th_fast: u8,
    /// Mask dilation before gating keypoints, pixels.
    #[arg(long, default_value_t = 8)]
    pub mask_dilation: usize,
    /// Largest Hamming distance of an accepted match.
    #[arg(long, default_value_t = 64)]
    pub max_match_distance: u32,
    #[arg(long, default_value_t = 300)]
    pub ransac_iterations: usize,
    /// RANSAC inlier distance, meters.
    #[arg(long, default_value_t = 0.05)]
    pub inlier_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrackArgs {
    fn params(&self) -> TrackingParams {
        TrackingParams {
            features: FeatureParams {
                nfeatures: self.nfeatures,
                scale_factor: self.scale_factor,
                nlevels: self.nlevels,
                ini_th_fast: self.ini_th_fast,
                min_th_fast: self.min_th_fast,
                mask_dilation: self.mask_dilation,
            },
            max_match_distance: self.max_match_distance,
            ransac_iterations: self.ransac_iterations,
            inlier_threshold: self.inlier_threshold,
            seed: self.seed,
        }
    }

    /// Flags, then the dataset's camera file, then TUM defaults.
    fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let mut k = CameraIntrinsics::default();
        let file = self.dataset.join(CAMERA_FILE);
        if file.is_file() {
            for (key, v) in load_config(&file)? {
                let v: f64 = v
                    .parse()
                    .with_context(|| format!("{}: '{key}' is not a number", file.display()))?;
                match key.as_str() {
                    "fx" => k.fx = v,
                    "fy" => k.fy = v,
                    "cx" => k.cx = v,
                    "cy" => k.cy = v,
                    "depth-factor" => k.depth_factor = v,
                    other => bail!("{}: unknown key '{other}'", file.display()),
                }
            }
        }
        for (field, flag) in [
            (&mut k.fx, self.fx),
            (&mut k.fy, self.fy),
            (&mut k.cx, self.cx),
            (&mut k.cy, self.cy),
            (&mut k.depth_factor, self.depth_factor),
        ] {
            if let Some(v) = flag {
                *field = v;
            }
        }
        k.validate()?;
        Ok(k)
    }
}

pub fn write_camera_file(dir: &Path, k: &CameraIntrinsics) -> Result<()> {
    let text = format!(
        "fx = {}\nfy = {}\ncx = {}\ncy = {}\ndepth-factor = {}\n",
        k.fx, k.fy, k.cx, k.cy, k.depth_factor
    );
    let path = dir.join(CAMERA_FILE);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_masks(seq: &TumSequence, dir: &Path) -> Result<Vec<BinaryMask>> {
    require_dir(dir)?;
    (0..seq.len())
        .into_par_iter()
        .map(|i| {
            let stem = stem_of(&seq.pairs[i].rgb_path);
            Ok(load_mask(find_with_stem(dir, &stem, &IMAGE_EXTENSIONS)?)?)
        })
        .collect()
}

pub fn run(args: &TrackArgs) -> Result<()> {
    require_dir(&args.dataset)?;
    let k = args.intrinsics()?;
    let params = args.params();
    params.validate()?;
    let seq = TumSequence::open(&args.dataset, args.max_diff)?;
    let frames = (0..seq.len())
        .into_par_iter()
        .map(|i| seq.frame(i, k.depth_factor))
        .collect::<mavo_core::Result<Vec<_>>>()?;
    let masks = args.masks.as_deref().map(|d| load_masks(&seq, d)).transpose()?;
    if let Some(m) = &masks {
        let (w, h) = (frames[0].gray.width(), frames[0].gray.height());
        if m.iter().any(|m| (m.width(), m.height()) != (w, h)) {
            bail!("masks must match the {w}x{h} frames");
        }
    }
    let result = track_sequence(&frames, masks.as_deref(), &k, &params)?;
    if !result.fallback_frames.is_empty() {
        log::warn!(
            "{} of {} frames used the constant-velocity fallback: {:?}",
            result.fallback_frames.len(),
            frames.len(),
            result.fallback_frames
        );
    }
    save_trajectory(&args.out, &result.trajectory, args.format)?;
    log::info!("tracked {} frames, wrote {}", frames.len(), args.out.display());
    Ok(())
}
