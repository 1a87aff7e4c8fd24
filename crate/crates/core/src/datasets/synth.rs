//! Synthetic RGB-D sequences with exact ground truth.
//!
//! The scene is a fronto-parallel textured plane 3 m in front of the first
//! camera pose plus a number of textured rectangles 1.5 m away that slide
//! sideways, bouncing between fixed limits. Rendering casts one ray per
//! pixel center and samples textures nearest-neighbor from a hash of the
//! texel index, so output depends only on the configuration.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crf::{BinaryMask, ProbField};
use crate::error::{Error, Result};
use crate::geometry::{Point3, Pose, Trajectory};
use crate::imaging::{to_gray, ColorImage, DepthImage, GrayImage};
use crate::odometry::{CameraIntrinsics, RgbdFrame, DEFAULT_DEPTH_FACTOR};

pub const BACKGROUND_DEPTH: f64 = 3.0;
pub const OBJECT_DEPTH: f64 = 1.5;

/// Objects covering more of the view than this leave no room to move.
pub const MAX_COVERAGE: f64 = 0.8;

/// Movable-label probability inside and outside objects.
const PROB_ON: f64 = 0.9;
const PROB_OFF: f64 = 0.1;

/// Camera trajectory in the world frame of the first pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraPath {
    Static,
    /// Constant translation per frame, meters.
    Line {
        step: [f64; 3],
    },
    /// Circle of `radius` in the image plane, rolling about the optical
    /// axis with the traversed angle.
    Arc {
        radius: f64,
        degrees_per_frame: f64,
    },
}

impl CameraPath {
    pub fn pose(&self, frame: usize) -> Pose {
        let k = frame as f64;
        match *self {
            CameraPath::Static => Pose::identity(),
            CameraPath::Line { step } => Pose::from_translation([step[0] * k, step[1] * k, step[2] * k]),
            CameraPath::Arc {
                radius,
                degrees_per_frame,
            } => {
                let th = (degrees_per_frame * k).to_radians();
                Pose::from_translation([radius * (th.cos() - 1.0), radius * th.sin(), 0.0])
                    .compose(&Pose::from_axis_angle(Vector3::z(), th))
            }
        }
    }
}

impl fmt::Display for CameraPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CameraPath::Static => write!(f, "static"),
            CameraPath::Line { step } => write!(f, "line:{},{},{}", step[0], step[1], step[2]),
            CameraPath::Arc {
                radius,
                degrees_per_frame,
            } => write!(f, "arc:{radius},{degrees_per_frame}"),
        }
    }
}

impl FromStr for CameraPath {
    type Err = Error;

    /// `static`, `line:dx,dy,dz` or `arc:radius,degrees_per_frame`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid(format!("invalid camera path '{s}'"));
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|v| v.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad))
                .collect::<Result<_>>()?
        };
        match (kind, nums.as_slice()) {
            ("static", []) => Ok(CameraPath::Static),
            ("line", [x, y, z]) => Ok(CameraPath::Line { step: [*x, *y, *z] }),
            ("arc", [r, d]) => Ok(CameraPath::Arc {
                radius: *r,
                degrees_per_frame: *d,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_frames: usize,
    pub width: usize,
    pub height: usize,
    pub camera_path: CameraPath,
    pub object_count: usize,
    /// Fraction of the first frame covered by all objects together.
    pub object_coverage: f64,
    /// Meters per frame.
    pub object_motion: f64,
    /// Texel size in pixels at the depth of its surface.
    pub texture_grain: f64,
    pub intrinsics: CameraIntrinsics,
    /// Seconds between frames.
    pub frame_interval: f64,
    /// Probability fields are stored at `1 / probfield_downsample` of the
    /// frame resolution, block-averaged.
    pub probfield_downsample: usize,
}

/// Intrinsics of a TUM-like camera scaled to `width` x `height`.
pub fn default_intrinsics(width: usize, height: usize) -> CameraIntrinsics {
    let f = 525.0 * width as f64 / 640.0;
    CameraIntrinsics {
        fx: f,
        fy: f,
        cx: (width as f64 - 1.0) / 2.0,
        cy: (height as f64 - 1.0) / 2.0,
        depth_factor: DEFAULT_DEPTH_FACTOR,
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_frames: 60,
            width: 320,
            height: 240,
            camera_path: CameraPath::Line {
                step: [0.004, 0.001, 0.0],
            },
            object_count: 1,
            object_coverage: 0.4,
            object_motion: 0.02,
            texture_grain: 4.0,
            intrinsics: default_intrinsics(320, 240),
            frame_interval: 1.0 / 30.0,
            probfield_downsample: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_frames == 0 {
            return Err(Error::invalid("a sequence needs at least one frame"));
        }
        if self.width < 64 || self.height < 64 {
            return Err(Error::invalid(format!(
                "image size {}x{} below 64x64",
                self.width, self.height
            )));
        }
        if !(0.0..1.0).contains(&self.object_coverage) {
            return Err(Error::invalid(format!(
                "coverage {} outside [0, 1)",
                self.object_coverage
            )));
        }
        if self.object_count > 0 && self.object_coverage > MAX_COVERAGE {
            return Err(Error::invalid(format!(
                "coverage {} leaves no room to place objects (at most {MAX_COVERAGE})",
                self.object_coverage
            )));
        }
        if self.object_count > 0 && self.object_coverage == 0.0 {
            return Err(Error::invalid("objects need a positive coverage"));
        }
        if !(self.object_motion >= 0.0) || !self.object_motion.is_finite() {
            return Err(Error::invalid(format!(
                "object motion {} must be >= 0",
                self.object_motion
            )));
        }
        if !(self.texture_grain >= 1.0) || !self.texture_grain.is_finite() {
            return Err(Error::invalid(format!(
                "texture grain {} must be >= 1 px",
                self.texture_grain
            )));
        }
        if !(self.frame_interval > 0.0) {
            return Err(Error::invalid("frame interval must be positive"));
        }
        if self.probfield_downsample == 0 {
            return Err(Error::invalid("probfield downsample must be >= 1"));
        }
        self.intrinsics.validate()?;
        // The camera must keep looking at the planes.
        for k in 0..self.num_frames {
            let c = self.camera_path.pose(k).translation().z;
            if c >= OBJECT_DEPTH - 0.1 {
                return Err(Error::invalid(format!("camera path reaches z = {c} m at frame {k}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthFrame {
    pub timestamp: f64,
    pub color: ColorImage,
    pub gray: GrayImage,
    pub depth: DepthImage,
}

#[derive(Debug, Clone)]
pub struct SynthSequence {
    pub frames: Vec<SynthFrame>,
    /// Camera-to-world poses.
    pub ground_truth: Trajectory,
    /// Exact object pixels per frame.
    pub masks: Vec<BinaryMask>,
    /// Two labels, index 1 being movable.
    pub prob_fields: Vec<ProbField>,
    pub intrinsics: CameraIntrinsics,
}

impl SynthSequence {
    pub fn rgbd_frames(&self) -> Vec<RgbdFrame> {
        self.frames
            .iter()
            .map(|f| RgbdFrame {
                timestamp: f.timestamp,
                gray: f.gray.clone(),
                depth: f.depth.clone(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Slider {
    /// Half extents in the plane, meters.
    half: [f64; 2],
    y: f64,
    lo: f64,
    hi: f64,
    /// Position along `[lo, hi]` at frame 0, as travelled distance.
    phase: f64,
}

impl Slider {
    /// Center x at `frame`: a triangle wave of slope `speed`.
    fn x(&self, frame: usize, speed: f64) -> f64 {
        let span = self.hi - self.lo;
        if span <= 0.0 {
            return self.lo;
        }
        let s = (self.phase + speed * frame as f64).rem_euclid(2.0 * span);
        self.lo + if s <= span { s } else { 2.0 * span - s }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn texel(seed: u64, layer: u64, ix: i64, iy: i64) -> u8 {
    let h = mix(seed ^ mix(layer.wrapping_mul(0xA24B_AED4_963E_E407) ^ mix((ix as u64) ^ mix(iy as u64))));
    (h >> 56) as u8
}

/// Bluish background and reddish objects. The hues stay dozens of levels
/// apart for every texel value, while the gray levels overlap.
fn background_color(v: u8) -> [u8; 3] {
    let v = v as u32;
    [(40 + v / 5) as u8, (60 + v / 3) as u8, (110 + v / 2) as u8]
}

fn object_color(v: u8) -> [u8; 3] {
    let v = v as u32;
    [(140 + v / 2) as u8, (30 + v / 5) as u8, (30 + v / 5) as u8]
}

fn place_objects(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Slider> {
    let n = cfg.object_count;
    if n == 0 {
        return Vec::new();
    }
    let k = &cfg.intrinsics;
    let side = cfg.object_coverage.sqrt();
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let col = w / n as f64;
    let rect_w = w * side / n as f64;
    let rect_h = h * side;
    // Pixel extents to meters on the object plane of the first camera.
    let mx = OBJECT_DEPTH / k.fx;
    let my = OBJECT_DEPTH / k.fy;
    (0..n)
        .map(|j| {
            let lo_px = col * j as f64 + rect_w / 2.0;
            let hi_px = col * (j + 1) as f64 - rect_w / 2.0;
            let free_y = h - rect_h;
            let cy_px = rect_h / 2.0 + free_y * rng.gen_range(0.25..0.75);
            let lo = (lo_px - 0.5 - k.cx) * mx;
            let hi = (hi_px - 0.5 - k.cx) * mx;
            Slider {
                half: [rect_w / 2.0 * mx, rect_h / 2.0 * my],
                y: (cy_px - 0.5 - k.cy) * my,
                lo,
                hi,
                phase: rng.gen_range(0.0..=(hi - lo).max(0.0)),
            }
        })
        .collect()
}

/// Intersection of the ray `origin + s * dir` with the plane `z = depth`.
fn hit_plane(origin: &Point3, dir: &Vector3<f64>, depth: f64) -> Option<(f64, Point3)> {
    if dir.z <= 1e-12 {
        return None;
    }
    let s = (depth - origin.z) / dir.z;
    (s > 0.0).then(|| (s, origin + dir * s))
}

pub fn synth_sequence(cfg: &SynthConfig) -> Result<SynthSequence> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let objects = place_objects(cfg, &mut rng);
    let tex_seed: u64 = rng.gen();
    let k = cfg.intrinsics;
    let (w, h) = (cfg.width, cfg.height);
    let bg_texel = cfg.texture_grain * BACKGROUND_DEPTH / k.fx;
    let obj_texel = cfg.texture_grain * OBJECT_DEPTH / k.fx;

    let mut frames = Vec::with_capacity(cfg.num_frames);
    let mut masks = Vec::with_capacity(cfg.num_frames);
    let mut prob_fields = Vec::with_capacity(cfg.num_frames);
    let mut gt = Vec::with_capacity(cfg.num_frames);
    for f in 0..cfg.num_frames {
        let pose = cfg.camera_path.pose(f);
        let origin = *pose.translation();
        let centers: Vec<f64> = objects.iter().map(|o| o.x(f, cfg.object_motion)).collect();
        let mut color = Vec::with_capacity(w * h * 3);
        let mut depth = Vec::with_capacity(w * h);
        let mut mask = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let ray = Vector3::new((u as f64 - k.cx) / k.fx, (v as f64 - k.cy) / k.fy, 1.0);
                let dir = pose.rotation() * ray;
                let mut hit = None;
                if let Some((s, p)) = hit_plane(&origin, &dir, OBJECT_DEPTH) {
                    for (j, o) in objects.iter().enumerate() {
                        let (lx, ly) = (p.x - centers[j], p.y - o.y);
                        if lx.abs() <= o.half[0] && ly.abs() <= o.half[1] {
                            let t = texel(
                                tex_seed,
                                1 + j as u64,
                                (lx / obj_texel).floor() as i64,
                                (ly / obj_texel).floor() as i64,
                            );
                            hit = Some((s, object_color(t), true));
                            break;
                        }
                    }
                }
                let (s, rgb, movable) = match hit {
                    Some(x) => x,
                    None => match hit_plane(&origin, &dir, BACKGROUND_DEPTH) {
                        Some((s, p)) => {
                            let t = texel(
                                tex_seed,
                                0,
                                (p.x / bg_texel).floor() as i64,
                                (p.y / bg_texel).floor() as i64,
                            );
                            (s, background_color(t), false)
                        }
                        None => (0.0, [0, 0, 0], false),
                    },
                };
                color.extend_from_slice(&rgb);
                // Ray z-component in the camera frame is 1, so s is depth.
                depth.push(s as f32);
                mask.push(movable);
            }
        }
        let color = ColorImage::new(w, h, color)?;
        let mask = BinaryMask::new(w, h, mask)?;
        prob_fields.push(soften(&mask, cfg.probfield_downsample)?);
        frames.push(SynthFrame {
            timestamp: timestamp(f, cfg.frame_interval),
            gray: to_gray(&color),
            color,
            depth: DepthImage::new(w, h, depth)?,
        });
        masks.push(mask);
        gt.push((timestamp(f, cfg.frame_interval), pose));
    }
    Ok(SynthSequence {
        frames,
        ground_truth: Trajectory::new(gt)?,
        masks,
        prob_fields,
        intrinsics: k,
    })
}

/// Frame time starting at 1 s, rounded to microseconds so it prints short.
fn timestamp(frame: usize, interval: f64) -> f64 {
    ((1.0 + frame as f64 * interval) * 1e6).round() / 1e6
}

/// Block-averaged mask mapped to `[PROB_OFF, PROB_ON]` movable probability.
fn soften(mask: &BinaryMask, factor: usize) -> Result<ProbField> {
    let (w, h) = (mask.width(), mask.height());
    let (fw, fh) = (w.div_ceil(factor), h.div_ceil(factor));
    let mut data = Vec::with_capacity(fw * fh * 2);
    for by in 0..fh {
        for bx in 0..fw {
            let (mut on, mut total) = (0usize, 0usize);
            for y in by * factor..((by + 1) * factor).min(h) {
                for x in bx * factor..((bx + 1) * factor).min(w) {
                    on += mask.get(x, y) as usize;
                    total += 1;
                }
            }
            let p = PROB_OFF + (PROB_ON - PROB_OFF) * on as f64 / total as f64;
            data.push(1.0 - p);
            data.push(p);
        }
    }
    ProbField::new(fw, fh, 2, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crf::{binarize_movable, MovableClassSet};

    fn small(objects: usize) -> SynthConfig {
        SynthConfig {
            num_frames: 4,
            camera_path: CameraPath::Static,
            object_count: objects,
            ..Default::default()
        }
    }

    #[test]
    fn static_empty_scene_is_constant() {
        let s = synth_sequence(&small(0)).unwrap();
        for f in &s.frames[1..] {
            assert_eq!(f.color, s.frames[0].color);
            assert_eq!(f.depth, s.frames[0].depth);
        }
        assert!(s.ground_truth.poses().all(|p| *p == Pose::identity()));
        assert!(s.masks.iter().all(|m| m.count_ones() == 0));
        assert!(s.frames[0]
            .depth
            .data()
            .iter()
            .all(|&d| (d as f64 - BACKGROUND_DEPTH).abs() < 1e-6));
    }

    #[test]
    fn coverage_matches_mask_area() {
        let s = synth_sequence(&small(1)).unwrap();
        let area = (320 * 240) as f64;
        for m in &s.masks {
            let frac = m.count_ones() as f64 / area;
            assert!((frac - 0.4).abs() <= 0.04, "coverage {frac}");
        }
        // The object moves between frames.
        assert_ne!(s.masks[0], s.masks[3]);
    }

    #[test]
    fn masks_agree_with_rendered_depth() {
        let s = synth_sequence(&SynthConfig {
            num_frames: 3,
            object_count: 2,
            object_coverage: 0.3,
            ..Default::default()
        })
        .unwrap();
        for (f, m) in s.frames.iter().zip(&s.masks) {
            for (d, &on) in f.depth.data().iter().zip(m.data()) {
                // Object pixels are the near plane; the camera does not roll here.
                assert_eq!(on, (*d as f64) < 2.0);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = synth_sequence(&small(1)).unwrap();
        let b = synth_sequence(&small(1)).unwrap();
        for (x, y) in a.frames.iter().zip(&b.frames) {
            assert_eq!(x.color, y.color);
            assert_eq!(x.depth, y.depth);
        }
        let c = synth_sequence(&SynthConfig { seed: 9, ..small(1) }).unwrap();
        assert_ne!(a.frames[0].color, c.frames[0].color);
    }

    #[test]
    fn prob_fields_soften_masks() {
        let s = synth_sequence(&small(1)).unwrap();
        let movable = MovableClassSet::from_indices(&[1]).unwrap();
        assert_eq!(binarize_movable(&s.prob_fields[0], &movable).unwrap(), s.masks[0]);
        let p = s.prob_fields[0].at(0, 0);
        assert!((p[1] - 0.1).abs() < 1e-12 || (p[1] - 0.9).abs() < 1e-12);

        let coarse = synth_sequence(&SynthConfig {
            probfield_downsample: 8,
            ..small(1)
        })
        .unwrap();
        assert_eq!(
            (coarse.prob_fields[0].width(), coarse.prob_fields[0].height()),
            (40, 30)
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(synth_sequence(&SynthConfig {
            object_coverage: 0.99,
            ..small(1)
        })
        .is_err());
        assert!(synth_sequence(&SynthConfig {
            num_frames: 0,
            ..small(1)
        })
        .is_err());
        assert!(synth_sequence(&SynthConfig {
            camera_path: CameraPath::Line { step: [0.0, 0.0, 0.5] },
            ..small(0)
        })
        .is_err());
    }

    #[test]
    fn camera_path_parsing() {
        for p in [
            CameraPath::Static,
            CameraPath::Line {
                step: [0.01, 0.0, -0.002],
            },
            CameraPath::Arc {
                radius: 0.2,
                degrees_per_frame: 6.0,
            },
        ] {
            assert_eq!(p.to_string().parse::<CameraPath>().unwrap(), p);
        }
        assert!("line:1,2".parse::<CameraPath>().is_err());
        assert!("spiral".parse::<CameraPath>().is_err());
        let arc = CameraPath::Arc {
            radius: 0.2,
            degrees_per_frame: 6.0,
        };
        let closed = arc.pose(60);
        assert!(closed.translation_norm() < 1e-12 && closed.rotation_angle_deg() < 1e-9);
    }
}
