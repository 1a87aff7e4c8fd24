use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mavo_core::datasets::{
    default_intrinsics, format_tum_list, save_color, save_depth, save_mask, save_probfield, save_trajectory_tum,
    synth_sequence, CameraPath, SynthConfig,
};
use mavo_core::odometry::DEFAULT_DEPTH_FACTOR;
use rayon::prelude::*;

use crate::config::ConfigArg;
use crate::files::ensure_dir;
use crate::track::write_camera_file;

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SynthArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Output directory; gets rgb/, depth/, masks/, probfields/, rgb.txt,
    /// depth.txt, groundtruth.txt and camera.cfg.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub num_frames: usize,
    #[arg(long, default_value_t = 320)]
    pub width: usize,
    #[arg(long, default_value_t = 240)]
    pub height: usize,
    /// `static`, `line:dx,dy,dz` (meters per frame) or `arc:radius,degrees_per_frame`.
    #[arg(long, default_value = "line:0.004,0.001,0")]
    pub camera_path: CameraPath,
    #[arg(long, default_value_t = 1)]
    pub object_count: usize,
    /// Fraction of the first frame covered by objects, in [0, 0.8].
    #[arg(long, default_value_t = 0.4)]
    pub object_coverage: f64,
    /// Object speed, meters per frame.
    #[arg(long, default_value_t = 0.02)]
    pub object_motion: f64,
    /// Texel size at the surface depth, pixels.
    #[arg(long, default_value_t = 4.0)]
    pub texture_grain: f64,
    /// Seconds between frames.
    #[arg(long, default_value_t = 1.0 / 30.0)]
    pub frame_interval: f64,
    /// Probability fields are stored at 1/N of the frame resolution.
    #[arg(long, default_value_t = 1)]
    pub probfield_downsample: usize,
}

impl SynthArgs {
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: self.seed,
            num_frames: self.num_frames,
            width: self.width,
            height: self.height,
            camera_path: self.camera_path,
            object_count: self.object_count,
            object_coverage: self.object_coverage,
            object_motion: self.object_motion,
            texture_grain: self.texture_grain,
            intrinsics: default_intrinsics(self.width, self.height),
            frame_interval: self.frame_interval,
            probfield_downsample: self.probfield_downsample,
        }
    }
}

pub fn run(args: &SynthArgs) -> Result<()> {
    let cfg = args.synth_config();
    let seq = synth_sequence(&cfg)?;
    let root = &args.out;
    for sub in ["rgb", "depth", "masks", "probfields"] {
        ensure_dir(&root.join(sub))?;
    }
    let names: Vec<String> = seq.frames.iter().map(|f| format!("{:.6}", f.timestamp)).collect();
    (0..seq.frames.len()).into_par_iter().try_for_each(|i| -> Result<()> {
        let f = &seq.frames[i];
        let n = &names[i];
        save_color(root.join(format!("rgb/{n}.png")), &f.color)?;
        save_depth(root.join(format!("depth/{n}.png")), &f.depth, DEFAULT_DEPTH_FACTOR)?;
        save_mask(root.join(format!("masks/{n}.png")), &seq.masks[i])?;
        save_probfield(root.join(format!("probfields/{n}.pfld")), &seq.prob_fields[i])?;
        Ok(())
    })?;
    for (list, sub, what) in [("rgb.txt", "rgb", "color images"), ("depth.txt", "depth", "depth maps")] {
        let entries: Vec<(f64, String)> = seq
            .frames
            .iter()
            .zip(&names)
            .map(|(f, n)| (f.timestamp, format!("{sub}/{n}.png")))
            .collect();
        let header = format!("{what}\nsynthetic sequence, seed {}\ntimestamp filename", cfg.seed);
        let path = root.join(list);
        std::fs::write(&path, format_tum_list(&entries, &header))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    save_trajectory_tum(root.join("groundtruth.txt"), &seq.ground_truth)?;
    write_camera_file(root, &seq.intrinsics)?;
    log::info!("wrote {} frames to {}", seq.frames.len(), root.display());
    Ok(())
}
