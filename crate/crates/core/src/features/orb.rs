//! Intensity-centroid orientation and steered BRIEF descriptors.

use std::f64::consts::TAU;
use std::fmt;

use super::pattern::PATTERN;
use super::KeyPoint;
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Radius of the circular orientation patch.
pub const ORIENTATION_RADIUS: usize = 15;

/// Smoothing applied to a level before descriptor sampling.
pub const DESCRIPTOR_BLUR_SIGMA: f64 = 2.0;

/// Orientation of `kp` (level-local coordinates) from the first-order
/// moments of the circular patch of `radius`, in `[0, 2pi)`. A patch with
/// vanishing moments gets angle 0. Pixels outside the image are clamped.
pub fn compute_orientation(level: &GrayImage, kp: &KeyPoint, radius: usize) -> f64 {
    let (cx, cy) = (kp.x.round() as isize, kp.y.round() as isize);
    let r = radius as isize;
    let (mut m01, mut m10) = (0i64, 0i64);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let v = level.get_clamped(cx + dx, cy + dy) as i64;
            m10 += dx as i64 * v;
            m01 += dy as i64 * v;
        }
    }
    if m01 == 0 && m10 == 0 {
        return 0.0;
    }
    let a = (m01 as f64).atan2(m10 as f64);
    if a >= 0.0 {
        return a;
    }
    // A tiny negative angle can round up to exactly TAU.
    let wrapped = a + TAU;
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// 256-bit binary descriptor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Descriptor {
    pub bits: [u64; 4],
}

impl Descriptor {
    pub fn bit(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.bits[i / 64] |= mask;
        } else {
            self.bits[i / 64] &= !mask;
        }
    }

    pub fn hamming(&self, other: &Descriptor) -> u32 {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.iter().map(|b| b.count_ones()).sum()
    }
}

impl fmt::Debug for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Descriptor({:016x}{:016x}{:016x}{:016x})",
            self.bits[3], self.bits[2], self.bits[1], self.bits[0]
        )
    }
}

/// Steered BRIEF descriptor of `kp` (level-local coordinates) on a blurred
/// level. Each sampling pair is rotated by `kp.angle` and rounded to the
/// pixel grid; bit `i` is set when the first sample is darker.
pub fn compute_descriptor(blurred: &GrayImage, kp: &KeyPoint) -> Result<Descriptor> {
    let (cx, cy) = (kp.x.round() as isize, kp.y.round() as isize);
    let (w, h) = (blurred.width() as isize, blurred.height() as isize);
    let (sin, cos) = kp.angle.sin_cos();
    let rotate = |x: i8, y: i8| -> (isize, isize) {
        let (x, y) = (x as f64, y as f64);
        (
            cx + (x * cos - y * sin).round() as isize,
            cy + (x * sin + y * cos).round() as isize,
        )
    };
    let mut desc = Descriptor::default();
    for (i, &[x1, y1, x2, y2]) in PATTERN.iter().enumerate() {
        let p1 = rotate(x1, y1);
        let p2 = rotate(x2, y2);
        for &(px, py) in &[p1, p2] {
            if px < 0 || py < 0 || px >= w || py >= h {
                return Err(Error::invalid(format!(
                    "descriptor patch around ({}, {}) leaves the {w}x{h} image",
                    kp.x, kp.y
                )));
            }
        }
        let a = blurred.get(p1.0 as usize, p1.1 as usize);
        let b = blurred.get(p2.0 as usize, p2.1 as usize);
        desc.set_bit(i, a < b);
    }
    Ok(desc)
}
