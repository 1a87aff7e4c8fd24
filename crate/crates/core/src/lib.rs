//! Movable-object-aware RGB-D visual odometry.
//!
//! The pipeline refines soft semantic label fields into binary masks of
//! movable objects with a dense CRF ([`crf`]), keeps ORB keypoints off those
//! masks while holding the per-frame keypoint budget fixed ([`features`]),
//! tracks frame-to-frame motion from RGB-D correspondences ([`odometry`]) and
//! scores trajectories with ATE/RPE statistics ([`evaluate`]).

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod crf;
pub mod datasets;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod geometry;
pub mod imaging;
pub mod odometry;

pub use error::{Error, Result};
