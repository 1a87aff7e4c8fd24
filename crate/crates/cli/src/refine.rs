use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use mavo_core::crf::{refine_mask, CrfParams, KernelConfig, MovableClassSet, VOC_LABELS};
use mavo_core::datasets::{load_color, load_depth, load_probfield, save_mask};
use mavo_core::odometry::DEFAULT_DEPTH_FACTOR;
use rayon::prelude::*;

use crate::config::ConfigArg;
use crate::files::{ensure_dir, find_with_stem, list_with_extension, require_dir, stem_of, IMAGE_EXTENSIONS};

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct RefineArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Directory of `<frame>.pfld` label probability fields.
    #[arg(long, value_name = "DIR")]
    pub probfields: PathBuf,
    /// Directory of `<frame>` color images.
    #[arg(long, value_name = "DIR")]
    pub rgb: PathBuf,
    /// Directory of `<frame>` 16-bit depth images; required by the `d` kernel.
    #[arg(long, value_name = "DIR")]
    pub depth: Option<PathBuf>,
    /// Output directory for `<frame>.png` masks (0 static, 255 movable).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Bilateral kernels: `c` (color), `d` (depth) or `c,d`.
    #[arg(long, default_value = "c")]
    pub kernels: KernelConfig,
    /// Mean-field iterations; 0 keeps the argmax of the input field.
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long, default_value_t = 3.0)]
    pub w_smooth: f64,
    #[arg(long, default_value_t = 5.0)]
    pub w_color: f64,
    #[arg(long, default_value_t = 5.0)]
    pub w_depth: f64,
    /// Smoothness kernel spatial std-dev, pixels.
    #[arg(long, default_value_t = 3.0)]
    pub theta_gamma: f64,
    /// Bilateral spatial std-dev, pixels.
    #[arg(long, default_value_t = 50.0)]
    pub theta_alpha: f64,
    /// Color std-dev, intensity levels.
    #[arg(long, default_value_t = 13.0)]
    pub theta_beta: f64,
    /// Depth std-dev, meters.
    #[arg(long, default_value_t = 0.3)]
    pub theta_delta: f64,
    /// Raw depth units per meter.
    #[arg(long, default_value_t = DEFAULT_DEPTH_FACTOR)]
    pub depth_factor: f64,
    /// Dilation radius applied to each mask, pixels.
    #[arg(long, default_value_t = 0)]
    pub dilation: usize,
    /// Movable label indices. Defaults to the VOC movable classes for 21-label
    /// fields and to every label but 0 otherwise.
    #[arg(long, value_delimiter = ',', value_name = "LABELS")]
    pub movable: Option<Vec<usize>>,
}

impl RefineArgs {
    fn crf_params(&self) -> CrfParams {
        CrfParams {
            w_smooth: self.w_smooth,
            w_color: self.w_color,
            w_depth: self.w_depth,
            theta_gamma: self.theta_gamma,
            theta_alpha: self.theta_alpha,
            theta_beta: self.theta_beta,
            theta_delta: self.theta_delta,
            iterations: self.iterations,
            ..CrfParams::default()
        }
        .with_kernels(self.kernels)
    }
}

pub fn movable_classes(explicit: Option<&[usize]>, num_labels: usize) -> Result<MovableClassSet> {
    let set = match explicit {
        Some(ix) => MovableClassSet::from_indices(ix)?,
        None if num_labels == VOC_LABELS.len() => MovableClassSet::voc_default(),
        None => MovableClassSet::from_indices(&(1..num_labels).collect::<Vec<_>>())?,
    };
    if let Some(m) = set.max_index() {
        if m >= num_labels {
            bail!("movable label {m} does not exist in a {num_labels}-label field");
        }
    }
    Ok(set)
}

fn refine_one(args: &RefineArgs, params: &CrfParams, field: &Path) -> Result<()> {
    let stem = stem_of(field);
    let q = load_probfield(field)?;
    let color = load_color(find_with_stem(&args.rgb, &stem, &IMAGE_EXTENSIONS)?)?;
    let depth = match (&args.depth, args.kernels.uses_depth()) {
        (Some(dir), true) => Some(load_depth(
            find_with_stem(dir, &stem, &IMAGE_EXTENSIONS)?,
            args.depth_factor,
        )?),
        _ => None,
    };
    let classes = movable_classes(args.movable.as_deref(), q.num_labels())?;
    let mask = refine_mask(&q, Some(&color), depth.as_ref(), params, &classes, args.dilation)?;
    save_mask(args.out.join(format!("{stem}.png")), &mask)?;
    Ok(())
}

pub fn run(args: &RefineArgs) -> Result<()> {
    if args.kernels.uses_depth() && args.depth.is_none() {
        bail!("kernel configuration '{}' needs --depth", args.kernels);
    }
    for dir in [Some(&args.probfields), Some(&args.rgb), args.depth.as_ref()]
        .into_iter()
        .flatten()
    {
        require_dir(dir)?;
    }
    let params = args.crf_params();
    params.validate()?;
    let fields = list_with_extension(&args.probfields, "pfld")?;
    if fields.is_empty() {
        bail!("no .pfld files in {}", args.probfields.display());
    }
    ensure_dir(&args.out)?;
    // Frames are independent; the CRF itself runs single-threaded.
    fields
        .par_iter()
        .try_for_each(|f| refine_one(args, &params, f).with_context(|| format!("refining {}", f.display())))?;
    log::info!("wrote {} masks to {}", fields.len(), args.out.display());
    Ok(())
}
