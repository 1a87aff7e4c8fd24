//! ORB keypoints kept off movable objects.
//!
//! [`extract`] runs FAST detection per pyramid level, drops candidates that
//! land on the (dilated) movable-object mask *before* spatial distribution,
//! and then fills each level's quota from the survivors. Because gating
//! happens ahead of the oct-tree, the frame still receives its full keypoint
//! budget whenever enough static texture exists.

mod fast;
mod matching;
mod octtree;
mod orb;
pub mod pattern;

pub use fast::{corner_score, detect_fast, CIRCLE, EDGE_THRESHOLD};
pub use matching::{match_descriptors, Match, DEFAULT_MAX_DISTANCE};
pub use octtree::{distribute_octtree, Rect};
pub use orb::{compute_descriptor, compute_orientation, Descriptor, DESCRIPTOR_BLUR_SIGMA, ORIENTATION_RADIUS};

use crate::crf::{dilate_mask, BinaryMask};
use crate::error::{Error, Result};
use crate::imaging::{build_pyramid, gaussian_blur, GrayImage, ImagePyramid};

/// Side length of the detection cells.
pub const CELL_SIZE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyPoint {
    pub x: f64,
    pub y: f64,
    pub octave: usize,
    pub response: f32,
    /// Radians in `[0, 2pi)`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureParams {
    pub nfeatures: usize,
    pub scale_factor: f64,
    pub nlevels: usize,
    pub ini_th_fast: u8,
    pub min_th_fast: u8,
    /// Square dilation radius applied to the mask at level 0.
    pub mask_dilation: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            nfeatures: 1000,
            scale_factor: 1.2,
            nlevels: 8,
            ini_th_fast: 20,
            min_th_fast: 7,
            mask_dilation: 8,
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        if self.nfeatures == 0 {
            return Err(Error::invalid("nfeatures must be positive"));
        }
        if self.nlevels == 0 {
            return Err(Error::invalid("nlevels must be positive"));
        }
        if !(self.scale_factor > 1.0) || !self.scale_factor.is_finite() {
            return Err(Error::invalid(format!(
                "scale factor {} must be > 1",
                self.scale_factor
            )));
        }
        if self.min_th_fast == 0 || self.ini_th_fast < self.min_th_fast {
            return Err(Error::invalid(format!(
                "FAST thresholds need iniThFAST >= minThFAST > 0, got {} and {}",
                self.ini_th_fast, self.min_th_fast
            )));
        }
        Ok(())
    }

    /// Per-level keypoint quotas following a geometric series in
    /// `1/scale_factor`; the last level absorbs rounding so they sum to
    /// `nfeatures`.
    pub fn level_quotas(&self) -> Vec<usize> {
        let s = 1.0 / self.scale_factor;
        let n = self.nlevels;
        let first = self.nfeatures as f64 * (1.0 - s) / (1.0 - s.powi(n as i32));
        let mut quotas = Vec::with_capacity(n);
        let mut assigned = 0usize;
        for k in 0..n.saturating_sub(1) {
            let q = ((first * s.powi(k as i32)).round() as usize).min(self.nfeatures - assigned);
            assigned += q;
            quotas.push(q);
        }
        quotas.push(self.nfeatures - assigned);
        quotas
    }
}

/// Drops every candidate whose level-0 position
/// `(round(x * level_scale), round(y * level_scale))` is set in `mask` or
/// falls outside it. Survivors keep their order.
pub fn gate_by_mask(candidates: &[KeyPoint], mask: &BinaryMask, level_scale: f64) -> Vec<KeyPoint> {
    candidates
        .iter()
        .filter(|k| {
            let x = (k.x * level_scale).round() as i64;
            let y = (k.y * level_scale).round() as i64;
            mask.get_checked(x, y) == Some(false)
        })
        .copied()
        .collect()
}

/// Per-level bookkeeping of one [`extract_with_stats`] call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractStats {
    /// Nominal share of the budget per level.
    pub quotas: Vec<usize>,
    /// Candidates left after mask gating.
    pub candidates: Vec<usize>,
    /// Keypoints actually requested from each level after redistributing
    /// the shortfall of starved levels.
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    /// Level-0 coordinates.
    pub keypoints: Vec<KeyPoint>,
    pub descriptors: Vec<Descriptor>,
    pub stats: ExtractStats,
}

/// Region of a level where corners may be detected.
fn detection_bounds(level: &GrayImage) -> Option<(usize, usize, usize, usize)> {
    let (w, h) = (level.width(), level.height());
    if w <= 2 * EDGE_THRESHOLD || h <= 2 * EDGE_THRESHOLD {
        return None;
    }
    Some((EDGE_THRESHOLD, EDGE_THRESHOLD, w - EDGE_THRESHOLD, h - EDGE_THRESHOLD))
}

/// Split `[lo, hi)` into roughly `CELL_SIZE` wide spans.
fn cell_spans(lo: usize, hi: usize) -> Vec<(usize, usize)> {
    let n = ((hi - lo) / CELL_SIZE).max(1);
    let step = (hi - lo).div_ceil(n);
    (0..n)
        .map(|i| (lo + i * step, (lo + (i + 1) * step).min(hi)))
        .filter(|(a, b)| a < b)
        .collect()
}

/// FAST candidates of one level, cell by cell: corners at `ini` where a cell
/// has any, corners at the relaxed `min` threshold otherwise.
fn detect_level(level: &GrayImage, ini: u8, min: u8) -> Vec<KeyPoint> {
    let Some((x0, y0, x1, y1)) = detection_bounds(level) else {
        return Vec::new();
    };
    let w = level.width();
    let h = level.height();
    let strong_scores = fast::score_map(level, ini);
    let strong = fast::suppress(&strong_scores, w, h);
    let mut weak: Option<(Vec<f32>, Vec<bool>)> = None;

    let mut out = Vec::new();
    let mut cell = Vec::new();
    for &(cy0, cy1) in &cell_spans(y0, y1) {
        for &(cx0, cx1) in &cell_spans(x0, x1) {
            cell.clear();
            collect_cell(&strong_scores, &strong, w, (cx0, cy0, cx1, cy1), &mut cell);
            if cell.is_empty() && min < ini {
                let (scores, keep) = weak.get_or_insert_with(|| {
                    let s = fast::score_map(level, min);
                    let k = fast::suppress(&s, w, h);
                    (s, k)
                });
                collect_cell(scores, keep, w, (cx0, cy0, cx1, cy1), &mut cell);
            }
            out.extend_from_slice(&cell);
        }
    }
    out
}

fn collect_cell(
    scores: &[f32],
    keep: &[bool],
    w: usize,
    (x0, y0, x1, y1): (usize, usize, usize, usize),
    out: &mut Vec<KeyPoint>,
) {
    for y in y0..y1 {
        for x in x0..x1 {
            let i = y * w + x;
            if keep[i] {
                out.push(KeyPoint {
                    x: x as f64,
                    y: y as f64,
                    octave: 0,
                    response: scores[i],
                    angle: 0.0,
                });
            }
        }
    }
}

/// Caps each level at its candidate supply and hands the shortfall to
/// levels with spare candidates, finest first.
fn allocate_targets(quotas: &[usize], supply: &[usize]) -> Vec<usize> {
    let mut targets: Vec<usize> = quotas.iter().zip(supply).map(|(&q, &s)| q.min(s)).collect();
    let mut deficit: usize = quotas.iter().sum::<usize>() - targets.iter().sum::<usize>();
    for (t, &s) in targets.iter_mut().zip(supply) {
        if deficit == 0 {
            break;
        }
        let extra = (s - *t).min(deficit);
        *t += extra;
        deficit -= extra;
    }
    targets
}

/// Keypoints and descriptors of a frame. `mask`, when given, must match
/// level 0; set pixels mark movable objects.
pub fn extract(
    pyramid: &ImagePyramid,
    mask: Option<&BinaryMask>,
    params: &FeatureParams,
) -> Result<(Vec<KeyPoint>, Vec<Descriptor>)> {
    let e = extract_with_stats(pyramid, mask, params)?;
    Ok((e.keypoints, e.descriptors))
}

pub fn extract_with_stats(
    pyramid: &ImagePyramid,
    mask: Option<&BinaryMask>,
    params: &FeatureParams,
) -> Result<Extraction> {
    params.validate()?;
    if pyramid.num_levels() != params.nlevels || (pyramid.scale_factor() - params.scale_factor).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "pyramid has {} levels at scale {}, parameters ask for {} at {}",
            pyramid.num_levels(),
            pyramid.scale_factor(),
            params.nlevels,
            params.scale_factor
        )));
    }
    let base = pyramid.level(0);
    let dilated = match mask {
        Some(m) => {
            if (m.width(), m.height()) != (base.width(), base.height()) {
                return Err(Error::DimensionMismatch {
                    expected_width: base.width(),
                    expected_height: base.height(),
                    width: m.width(),
                    height: m.height(),
                });
            }
            Some(dilate_mask(m, params.mask_dilation))
        }
        None => None,
    };

    let scales = pyramid.level_scales();
    let mut per_level = Vec::with_capacity(params.nlevels);
    for (k, level) in pyramid.levels().iter().enumerate() {
        let cands = detect_level(level, params.ini_th_fast, params.min_th_fast);
        per_level.push(match &dilated {
            Some(m) => gate_by_mask(&cands, m, scales[k]),
            None => cands,
        });
    }

    let quotas = params.level_quotas();
    let supply: Vec<usize> = per_level.iter().map(Vec::len).collect();
    let targets = allocate_targets(&quotas, &supply);

    let mut keypoints = Vec::with_capacity(params.nfeatures);
    let mut descriptors = Vec::with_capacity(params.nfeatures);
    for (k, level) in pyramid.levels().iter().enumerate() {
        if targets[k] == 0 {
            continue;
        }
        let (x0, y0, x1, y1) = detection_bounds(level).expect("level with candidates has a detection region");
        let bounds = Rect::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64);
        let mut kept = distribute_octtree(&per_level[k], targets[k], bounds);
        debug_assert!(kept.len() >= targets[k] && kept.len() <= targets[k] + 3 + (x1 - x0) / (y1 - y0));
        kept.truncate(targets[k]);

        let blurred = gaussian_blur(level, DESCRIPTOR_BLUR_SIGMA)?;
        for mut kp in kept {
            kp.angle = compute_orientation(level, &kp, ORIENTATION_RADIUS);
            descriptors.push(compute_descriptor(&blurred, &kp)?);
            keypoints.push(KeyPoint {
                x: kp.x * scales[k],
                y: kp.y * scales[k],
                octave: k,
                ..kp
            });
        }
    }
    log::debug!(
        "extracted {} keypoints (candidates per level {:?})",
        keypoints.len(),
        supply
    );
    Ok(Extraction {
        keypoints,
        descriptors,
        stats: ExtractStats {
            quotas,
            candidates: supply,
            targets,
        },
    })
}

/// Builds the pyramid described by `params` and extracts from it.
pub fn extract_from_image(image: &GrayImage, mask: Option<&BinaryMask>, params: &FeatureParams) -> Result<Extraction> {
    params.validate()?;
    let pyramid = build_pyramid(image, params.nlevels, params.scale_factor)?;
    extract_with_stats(&pyramid, mask, params)
}
