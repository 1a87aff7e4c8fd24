use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mavo_core::datasets::{
    associate as pair_lists, format_associations, load_trajectory, load_tum_list, save_trajectory, TrajectoryFormat,
};
use mavo_core::evaluate::DEFAULT_MAX_DIFF;

use crate::config::ConfigArg;

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct AssociateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_name = "FILE")]
    pub first: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub second: PathBuf,
    /// Output file, one `t1 path1 t2 path2` line per pair.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Pairs must be strictly closer than this, seconds.
    #[arg(long, default_value_t = DEFAULT_MAX_DIFF)]
    pub max_diff: f64,
    /// Added to the second list's timestamps, seconds.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub offset: f64,
}

pub fn associate(args: &AssociateArgs) -> Result<()> {
    let a = load_tum_list(&args.first)?;
    let b = load_tum_list(&args.second)?;
    let pairs = pair_lists(&a, &b, args.max_diff, args.offset)?;
    std::fs::write(&args.out, format_associations(&pairs))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    log::info!("{} of {} entries paired", pairs.len(), a.len());
    Ok(())
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Input format; by default `.kitti` files are kitti, others tum.
    #[arg(long)]
    pub from: Option<TrajectoryFormat>,
    /// Output format, chosen like `--from`.
    #[arg(long)]
    pub to: Option<TrajectoryFormat>,
}

pub fn convert(args: &ConvertArgs) -> Result<()> {
    let traj = load_trajectory(&args.input, args.from)?;
    save_trajectory(&args.output, &traj, args.to)?;
    Ok(())
}
