//! FAST-9/16 segment-test corners.

use super::KeyPoint;
use crate::imaging::GrayImage;

/// Pixels within this distance of the image border are never reported; the
/// orientation and descriptor patches need the room.
pub const EDGE_THRESHOLD: usize = 19;

/// Minimum contiguous arc length of the segment test.
const ARC: usize = 9;

/// Bresenham circle of radius 3, clockwise from the top.
pub const CIRCLE: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// True when `flags` (16 bits around the circle) holds a wrap-around run of
/// at least [`ARC`] set bits.
#[inline]
fn has_arc(flags: u16) -> bool {
    if flags.count_ones() < ARC as u32 {
        return false;
    }
    let doubled = (flags as u32) | ((flags as u32) << 16);
    let mut run = 0;
    for b in 0..32 {
        if doubled >> b & 1 == 1 {
            run += 1;
            if run >= ARC {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// FAST score of pixel `(x, y)` at `threshold`, or 0 when it is not a corner.
///
/// The score is the sum of `|I_c - I_p| - threshold` over the circle pixels on
/// the side (brighter or darker) that passes the segment test; when both
/// pass, the larger sum wins.
pub fn corner_score(img: &GrayImage, x: usize, y: usize, threshold: u8) -> f32 {
    let w = img.width() as isize;
    let data = img.data();
    let base = y as isize * w + x as isize;
    let p = data[base as usize] as i32;
    let t = threshold as i32;
    let (mut bright, mut dark) = (0u16, 0u16);
    let (mut bright_sum, mut dark_sum) = (0i32, 0i32);
    for (k, (dx, dy)) in CIRCLE.iter().enumerate() {
        let v = data[(base + dy * w + dx) as usize] as i32;
        if v > p + t {
            bright |= 1 << k;
            bright_sum += v - p - t;
        } else if v < p - t {
            dark |= 1 << k;
            dark_sum += p - v - t;
        }
    }
    let mut score = 0;
    if has_arc(bright) {
        score = bright_sum;
    }
    if has_arc(dark) {
        score = score.max(dark_sum);
    }
    score as f32
}

/// Dense score map over the detection region; zero elsewhere.
pub(crate) fn score_map(img: &GrayImage, threshold: u8) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let mut scores = vec![0.0f32; w * h];
    if w <= 2 * EDGE_THRESHOLD || h <= 2 * EDGE_THRESHOLD {
        return scores;
    }
    for y in EDGE_THRESHOLD..h - EDGE_THRESHOLD {
        for x in EDGE_THRESHOLD..w - EDGE_THRESHOLD {
            scores[y * w + x] = corner_score(img, x, y, threshold);
        }
    }
    scores
}

/// 3x3 non-maximum suppression. Equal neighboring scores keep the corner
/// that comes first in raster order, so no two survivors are 8-adjacent.
pub(crate) fn suppress(scores: &[f32], w: usize, h: usize) -> Vec<bool> {
    let mut keep = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let s = scores[i];
            if s <= 0.0 {
                continue;
            }
            let mut best = true;
            'nb: for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if scores[j] > s || (scores[j] == s && j < i) {
                        best = false;
                        break 'nb;
                    }
                }
            }
            keep[i] = best;
        }
    }
    keep
}

/// FAST corners with non-maximum suppression, in level-local coordinates
/// and raster order. `octave` is left at 0.
pub fn detect_fast(level: &GrayImage, threshold: u8) -> Vec<KeyPoint> {
    let (w, h) = (level.width(), level.height());
    let scores = score_map(level, threshold.max(1));
    let keep = suppress(&scores, w, h);
    keep.iter()
        .enumerate()
        .filter(|(_, k)| **k)
        .map(|(i, _)| KeyPoint {
            x: (i % w) as f64,
            y: (i / w) as f64,
            octave: 0,
            response: scores[i],
            angle: 0.0,
        })
        .collect()
}
