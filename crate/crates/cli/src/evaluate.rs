use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mavo_core::datasets::{load_trajectory, TrajectoryFormat};
use mavo_core::evaluate::{associate_poses, ate_with, parse_csv, to_csv, EvaluationReport, RpeDelta, DEFAULT_MAX_DIFF};
use mavo_core::geometry::Point3;

use crate::config::ConfigArg;
use crate::svg::trajectory_svg;
use crate::Failure;

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Ground-truth trajectory.
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,
    /// Estimated trajectory.
    #[arg(long, value_name = "FILE")]
    pub est: PathBuf,
    /// Metrics CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Top-down SVG plot of both paths after alignment.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
    /// RPE interval: `N` or `Nf` frames, `Xs` seconds.
    #[arg(long, default_value = "1")]
    pub delta: RpeDelta,
    /// Baseline metrics CSV; fills the improvement column.
    #[arg(long, value_name = "CSV")]
    pub improve_against: Option<PathBuf>,
    /// Largest timestamp difference when pairing poses, seconds.
    #[arg(long, default_value_t = DEFAULT_MAX_DIFF)]
    pub max_diff: f64,
    /// Format of both trajectories; by default `.kitti` files are kitti, others tum.
    #[arg(long)]
    pub format: Option<TrajectoryFormat>,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let gt = load_trajectory(&args.gt, args.format)?;
    let est = load_trajectory(&args.est, args.format)?;
    let baseline = match &args.improve_against {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            Some(parse_csv(&text).with_context(|| format!("in baseline {}", p.display()))?)
        }
        None => None,
    };
    let pairs = associate_poses(&gt, &est, args.max_diff)?;
    if pairs.is_empty() {
        return Err(Failure(format!(
            "no estimated pose lies within {} s of a ground-truth pose",
            args.max_diff
        ))
        .into());
    }
    let report = EvaluationReport::compute(&pairs, args.delta)?;
    let csv = to_csv(&report, baseline.as_deref())?;
    std::fs::write(&args.out, &csv).with_context(|| format!("cannot write {}", args.out.display()))?;

    if let Some(svg_path) = &args.svg {
        let fit = ate_with(&pairs, false)?;
        let g: Vec<Point3> = pairs.iter().map(|p| *p.gt.translation()).collect();
        let e: Vec<Point3> = pairs
            .iter()
            .map(|p| fit.alignment.transform_point(p.est.translation()))
            .collect();
        std::fs::write(svg_path, trajectory_svg(&g, &e))
            .with_context(|| format!("cannot write {}", svg_path.display()))?;
    }
    log::info!(
        "{} pose pairs: ATE rmse {:.6} m, RPE rmse {:.6} m / {:.6} deg",
        pairs.len(),
        report.ate.rmse,
        report.rpe.trans.rmse,
        report.rpe.rot.rmse
    );
    Ok(())
}
