//! `mavo`: batch front end for movable-object-aware RGB-D odometry.
//!
//! Exit codes: 0 success, 1 tracking or evaluation failure, 2 usage or I/O
//! error.

mod config;
mod evaluate;
mod files;
mod refine;
mod svg;
mod synth;
mod tools;
mod track;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "mavo", version, about = "Movable-object-aware RGB-D visual odometry")]
#[command(
    after_help = "Every subcommand accepts --config FILE with `key = value` lines naming its long flags; \
                        flags given on the command line win over the file."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Refine soft label fields into binary movable-object masks with a dense CRF.
    Refine(refine::RefineArgs),
    /// Estimate a camera trajectory for a TUM-layout RGB-D sequence.
    Track(track::TrackArgs),
    /// Score an estimated trajectory against ground truth (ATE, RPE).
    Evaluate(evaluate::EvaluateArgs),
    /// Write a synthetic dynamic RGB-D sequence in TUM layout.
    Synth(synth::SynthArgs),
    /// Pair two TUM timestamp lists, as for rgb.txt and depth.txt.
    Associate(tools::AssociateArgs),
    /// Convert a trajectory between TUM and KITTI formats.
    Convert(tools::ConvertArgs),
}

/// A failed estimate rather than bad input.
#[derive(Debug)]
pub struct Failure(pub String);

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<mavo_core::Error>() {
            return if e.is_input_error() { EXIT_USAGE } else { EXIT_FAILURE };
        }
        if cause.downcast_ref::<Failure>().is_some() {
            return EXIT_FAILURE;
        }
    }
    EXIT_USAGE
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Refine(a) => refine::run(&a),
        Command::Track(a) => track::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Synth(a) => synth::run(&a),
        Command::Associate(a) => tools::associate(&a),
        Command::Convert(a) => tools::convert(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
