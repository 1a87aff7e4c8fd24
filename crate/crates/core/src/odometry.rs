//! Minimal frame-to-frame RGB-D odometry.
//!
//! This is a stand-in for a full SLAM tracking thread: consecutive frames are
//! matched by ORB descriptors, matched keypoints are lifted to 3-D with the
//! depth image, and the relative motion is fitted by RANSAC over closed-form
//! rigid alignments. There is no map, no keyframe logic and no loop closing.
//! Its only job is to make the effect of mask gating measurable.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::crf::BinaryMask;
use crate::error::{Error, Result};
use crate::features::{extract_from_image, match_descriptors, Descriptor, FeatureParams, KeyPoint};
use crate::geometry::{rigid_align, Point3, Pose, Trajectory};
use crate::imaging::{DepthImage, GrayImage};

/// Depth units per meter in TUM 16-bit depth images.
pub const DEFAULT_DEPTH_FACTOR: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Raw depth units per meter.
    pub depth_factor: f64,
}

impl Default for CameraIntrinsics {
    /// Nominal TUM RGB-D intrinsics.
    fn default() -> Self {
        Self {
            fx: 525.0,
            fy: 525.0,
            cx: 319.5,
            cy: 239.5,
            depth_factor: DEFAULT_DEPTH_FACTOR,
        }
    }
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, depth_factor: f64) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            depth_factor,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) || !self.fx.is_finite() || !self.fy.is_finite() {
            return Err(Error::invalid(format!(
                "focal lengths must be positive, got {} and {}",
                self.fx, self.fy
            )));
        }
        if !self.cx.is_finite() || !self.cy.is_finite() {
            return Err(Error::invalid("principal point must be finite"));
        }
        if !(self.depth_factor > 0.0) || !self.depth_factor.is_finite() {
            return Err(Error::invalid(format!(
                "depth factor {} must be positive",
                self.depth_factor
            )));
        }
        Ok(())
    }

    /// Pixel coordinates of a camera-frame point.
    pub fn project(&self, p: &Point3) -> (f64, f64) {
        (self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy)
    }
}

/// A matched pair of 3-D points, one per frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence3D {
    pub point_a: Point3,
    pub point_b: Point3,
}

/// Camera-frame point under `kp`, or `None` where depth is missing or the
/// keypoint lies outside the depth image.
pub fn back_project(kp: &KeyPoint, depth: &DepthImage, k: &CameraIntrinsics) -> Option<Point3> {
    let (x, y) = (kp.x.round(), kp.y.round());
    if x < 0.0 || y < 0.0 || x >= depth.width() as f64 || y >= depth.height() as f64 {
        return None;
    }
    let d = depth.get(x as usize, y as usize) as f64;
    if d <= 0.0 {
        return None;
    }
    Some(Point3::new((kp.x - k.cx) * d / k.fx, (kp.y - k.cy) * d / k.fy, d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    /// Maps `point_b` onto `point_a`, i.e. the pose of frame B in frame A.
    pub pose: Pose,
    /// Indices of correspondences within the inlier threshold of `pose`.
    pub inliers: Vec<usize>,
}

fn residual(pose: &Pose, c: &Correspondence3D) -> f64 {
    (pose.transform_point(&c.point_b) - c.point_a).norm()
}

fn inliers_of(pose: &Pose, corr: &[Correspondence3D], thresh: f64) -> Vec<usize> {
    (0..corr.len()).filter(|&i| residual(pose, &corr[i]) < thresh).collect()
}

/// Least-squares refit on `idx` and its RMS residual over the same set.
fn refit(corr: &[Correspondence3D], idx: &[usize]) -> Option<(Pose, f64)> {
    let a: Vec<Point3> = idx.iter().map(|&i| corr[i].point_a).collect();
    let b: Vec<Point3> = idx.iter().map(|&i| corr[i].point_b).collect();
    let pose = rigid_align(&b, &a).ok()?;
    let ss: f64 = idx.iter().map(|&i| residual(&pose, &corr[i]).powi(2)).sum();
    Some((pose, (ss / idx.len() as f64).sqrt()))
}

/// Seeded RANSAC over minimal 3-point rigid fits. The hypothesis with the
/// most inliers wins, ties going to the lower RMS of its inlier refit. The
/// winner is refit on its inliers, and once more on the inliers of that
/// refit.
pub fn ransac_rigid(
    corr: &[Correspondence3D],
    iterations: usize,
    inlier_thresh: f64,
    seed: u64,
) -> Result<RansacResult> {
    if corr.len() < 3 {
        return Err(Error::TrackingFailure(format!(
            "{} correspondences, at least 3 needed",
            corr.len()
        )));
    }
    if !(inlier_thresh > 0.0) {
        return Err(Error::invalid(format!(
            "inlier threshold {inlier_thresh} must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, f64, Pose)> = None;
    for _ in 0..iterations.max(1) {
        let pick = sample(&mut rng, corr.len(), 3);
        let a: Vec<Point3> = pick.iter().map(|i| corr[i].point_a).collect();
        let b: Vec<Point3> = pick.iter().map(|i| corr[i].point_b).collect();
        let Ok(hyp) = rigid_align(&b, &a) else {
            continue;
        };
        let inl = inliers_of(&hyp, corr, inlier_thresh);
        if inl.len() < 3 || best.as_ref().is_some_and(|(n, _, _)| inl.len() < *n) {
            continue;
        }
        let Some((pose, rmse)) = refit(corr, &inl) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((n, r, _)) => inl.len() > *n || rmse < *r,
        };
        if better {
            let all = inl.len() == corr.len();
            best = Some((inl.len(), rmse, pose));
            if all && rmse == 0.0 {
                break;
            }
        }
    }
    let Some((_, _, pose)) = best else {
        return Err(Error::TrackingFailure("no hypothesis reached 3 inliers".into()));
    };
    let mut inliers = inliers_of(&pose, corr, inlier_thresh);
    let mut pose = pose;
    if inliers.len() >= 3 {
        if let Some((p, _)) = refit(corr, &inliers) {
            pose = p;
            inliers = inliers_of(&pose, corr, inlier_thresh);
        }
    }
    if inliers.len() < 3 {
        return Err(Error::TrackingFailure(format!(
            "final model has {} inliers",
            inliers.len()
        )));
    }
    Ok(RansacResult { pose, inliers })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingParams {
    pub features: FeatureParams,
    pub max_match_distance: u32,
    pub ransac_iterations: usize,
    /// Meters.
    pub inlier_threshold: f64,
    pub seed: u64,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self {
            features: FeatureParams::default(),
            max_match_distance: crate::features::DEFAULT_MAX_DISTANCE,
            ransac_iterations: 300,
            inlier_threshold: 0.05,
            seed: 0,
        }
    }
}

impl TrackingParams {
    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if !(self.inlier_threshold > 0.0) || !self.inlier_threshold.is_finite() {
            return Err(Error::invalid(format!(
                "inlier threshold {} must be positive",
                self.inlier_threshold
            )));
        }
        if self.ransac_iterations == 0 {
            return Err(Error::invalid("RANSAC needs at least one iteration"));
        }
        Ok(())
    }
}

/// Intensity and metric depth of one frame.
#[derive(Debug, Clone)]
pub struct RgbdFrame {
    pub timestamp: f64,
    pub gray: GrayImage,
    pub depth: DepthImage,
}

/// Features of one frame together with their back-projections.
#[derive(Debug, Clone)]
pub struct FrameFeatures {
    pub keypoints: Vec<KeyPoint>,
    pub descriptors: Vec<Descriptor>,
    pub points: Vec<Option<Point3>>,
}

impl FrameFeatures {
    pub fn compute(
        gray: &GrayImage,
        depth: &DepthImage,
        mask: Option<&BinaryMask>,
        k: &CameraIntrinsics,
        params: &FeatureParams,
    ) -> Result<Self> {
        if (gray.width(), gray.height()) != (depth.width(), depth.height()) {
            return Err(Error::DimensionMismatch {
                expected_width: gray.width(),
                expected_height: gray.height(),
                width: depth.width(),
                height: depth.height(),
            });
        }
        let e = extract_from_image(gray, mask, params)?;
        let points = e.keypoints.iter().map(|kp| back_project(kp, depth, k)).collect();
        Ok(Self {
            keypoints: e.keypoints,
            descriptors: e.descriptors,
            points,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate {
    /// Pose of frame B in frame A.
    pub pose: Pose,
    pub matches: usize,
    pub correspondences: usize,
    pub inliers: usize,
}

/// Relative pose from precomputed features of two frames.
pub fn track_features(
    a: &FrameFeatures,
    b: &FrameFeatures,
    params: &TrackingParams,
    seed: u64,
) -> Result<PairEstimate> {
    let matches = match_descriptors(&a.descriptors, &b.descriptors, params.max_match_distance);
    let corr: Vec<Correspondence3D> = matches
        .iter()
        .filter_map(|m| {
            Some(Correspondence3D {
                point_a: a.points[m.index_a]?,
                point_b: b.points[m.index_b]?,
            })
        })
        .collect();
    let fit = ransac_rigid(&corr, params.ransac_iterations, params.inlier_threshold, seed)?;
    Ok(PairEstimate {
        pose: fit.pose,
        matches: matches.len(),
        correspondences: corr.len(),
        inliers: fit.inliers.len(),
    })
}

/// Pose of `frame_b` relative to `frame_a`, with optional movable-object
/// masks gating feature extraction in each frame.
pub fn track_pair(
    frame_a: &RgbdFrame,
    frame_b: &RgbdFrame,
    mask_a: Option<&BinaryMask>,
    mask_b: Option<&BinaryMask>,
    k: &CameraIntrinsics,
    params: &TrackingParams,
) -> Result<PairEstimate> {
    params.validate()?;
    k.validate()?;
    let fa = FrameFeatures::compute(&frame_a.gray, &frame_a.depth, mask_a, k, &params.features)?;
    let fb = FrameFeatures::compute(&frame_b.gray, &frame_b.depth, mask_b, k, &params.features)?;
    track_features(&fa, &fb, params, params.seed)
}

#[derive(Debug, Clone)]
pub struct SequenceResult {
    /// Camera-to-world poses, the first frame defining the world.
    pub trajectory: Trajectory,
    /// Frames whose pose came from the constant-velocity fallback.
    pub fallback_frames: Vec<usize>,
    /// Per-pair inlier counts; 0 for fallback pairs.
    pub inliers: Vec<usize>,
}

/// Runs `f` over `items` on all available cores, keeping order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    if threads <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(c, part)| {
                let f = &f;
                s.spawn(move || {
                    part.iter()
                        .enumerate()
                        .map(|(i, t)| f(c * chunk + i, t))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

/// Tracks a sequence pair by pair and chains the relative poses. A pair that
/// fails to track reuses the previous relative motion and is reported in
/// [`SequenceResult::fallback_frames`].
pub fn track_sequence(
    frames: &[RgbdFrame],
    masks: Option<&[BinaryMask]>,
    k: &CameraIntrinsics,
    params: &TrackingParams,
) -> Result<SequenceResult> {
    params.validate()?;
    k.validate()?;
    if frames.is_empty() {
        return Err(Error::invalid("cannot track an empty sequence"));
    }
    if let Some(m) = masks {
        if m.len() != frames.len() {
            return Err(Error::invalid(format!("{} masks for {} frames", m.len(), frames.len())));
        }
    }
    let features: Vec<Result<FrameFeatures>> = parallel_map(frames, |i, f| {
        FrameFeatures::compute(&f.gray, &f.depth, masks.map(|m| &m[i]), k, &params.features)
    });
    let features: Vec<FrameFeatures> = features.into_iter().collect::<Result<_>>()?;

    let pairs: Vec<usize> = (1..frames.len()).collect();
    let estimates = parallel_map(&pairs, |_, &i| {
        track_features(
            &features[i - 1],
            &features[i],
            params,
            params.seed.wrapping_add(i as u64),
        )
    });

    let mut entries = Vec::with_capacity(frames.len());
    entries.push((frames[0].timestamp, Pose::identity()));
    let mut current = Pose::identity();
    let mut velocity = Pose::identity();
    let mut fallback_frames = Vec::new();
    let mut inliers = Vec::with_capacity(pairs.len());
    for (&i, est) in pairs.iter().zip(estimates) {
        match est {
            Ok(e) => {
                velocity = e.pose;
                inliers.push(e.inliers);
            }
            Err(err) if !err.is_input_error() => {
                log::warn!("frame {i}: {err}; reusing previous motion");
                fallback_frames.push(i);
                inliers.push(0);
            }
            Err(err) => return Err(err),
        }
        current = current.compose(&velocity);
        entries.push((frames[i].timestamp, current));
    }
    Ok(SequenceResult {
        trajectory: Trajectory::new(entries)?,
        fallback_frames,
        inliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};

    #[test]
    fn back_projection_examples() {
        let k = CameraIntrinsics::new(500.0, 500.0, 10.0, 8.0, 5000.0).unwrap();
        let at = |x, y| KeyPoint {
            x,
            y,
            octave: 0,
            response: 0.0,
            angle: 0.0,
        };
        let two = DepthImage::filled(20, 16, 2.0);
        assert_eq!(back_project(&at(10.0, 8.0), &two, &k), Some(Point3::new(0.0, 0.0, 2.0)));
        assert_eq!(back_project(&at(10.0, 8.0), &DepthImage::filled(20, 16, 0.0), &k), None);
        let wide = CameraIntrinsics::new(5.0, 5.0, 10.0, 8.0, 5000.0).unwrap();
        let one = DepthImage::filled(20, 16, 1.0);
        assert_eq!(
            back_project(&at(15.0, 8.0), &one, &wide),
            Some(Point3::new(1.0, 0.0, 1.0))
        );
        assert_eq!(back_project(&at(25.0, 8.0), &one, &wide), None);
        assert!(CameraIntrinsics::new(0.0, 1.0, 0.0, 0.0, 1.0).is_err());
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(1.0..4.0),
                )
            })
            .collect()
    }

    fn close(a: &Pose, b: &Pose, tol: f64) -> bool {
        (a.translation() - b.translation()).norm() < tol
            && a.inverse().compose(b).rotation_angle_deg() < tol.to_degrees()
    }

    #[test]
    fn noiseless_consensus_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let motion = Pose::from_translation([0.1, -0.05, 0.2])
            .compose(&Pose::from_axis_angle(Vector3::new(0.2, 1.0, 0.1), 0.15));
        let corr: Vec<_> = random_points(&mut rng, 50)
            .into_iter()
            .map(|b| Correspondence3D {
                point_a: motion.transform_point(&b),
                point_b: b,
            })
            .collect();
        let r = ransac_rigid(&corr, 300, 0.05, 1).unwrap();
        assert!(close(&r.pose, &motion, 1e-6));
        assert_eq!(r.inliers.len(), 50);

        let r3 = ransac_rigid(&corr[..3], 10, 0.05, 1).unwrap();
        assert!(close(&r3.pose, &motion, 1e-9));
    }

    #[test]
    fn independent_mover_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let motion_a = Pose::from_translation([0.05, 0.0, 0.01]).compose(&Pose::from_axis_angle(Vector3::y(), 0.05));
        let motion_b = Pose::from_translation([-0.4, 0.3, 0.2]);
        let pts = random_points(&mut rng, 100);
        let corr: Vec<_> = pts
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let m = if i < 70 { &motion_a } else { &motion_b };
                Correspondence3D {
                    point_a: m.transform_point(b),
                    point_b: *b,
                }
            })
            .collect();
        let r = ransac_rigid(&corr, 300, 0.05, 7).unwrap();
        assert!(close(&r.pose, &motion_a, 1e-6));
        assert!(r.inliers.iter().all(|&i| i < 70));
        assert_eq!(r.inliers.len(), 70);
        // Fixed seed, fixed answer.
        assert_eq!(ransac_rigid(&corr, 300, 0.05, 7).unwrap(), r);
    }

    #[test]
    fn too_few_correspondences_fail_tracking() {
        let c = Correspondence3D {
            point_a: Point3::zeros(),
            point_b: Point3::zeros(),
        };
        let err = ransac_rigid(&[c, c], 10, 0.05, 0).unwrap_err();
        assert!(matches!(err, Error::TrackingFailure(_)));
        // Coincident points never yield a model.
        assert!(matches!(
            ransac_rigid(&[c, c, c], 10, 0.05, 0).unwrap_err(),
            Error::TrackingFailure(_)
        ));
    }
}
