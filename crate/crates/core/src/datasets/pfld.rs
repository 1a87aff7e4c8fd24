//! Binary label-probability files.
//!
//! Layout, all little-endian:
//!
//! | offset | size          | content                                   |
//! |--------|---------------|-------------------------------------------|
//! | 0      | 4             | magic `PFLD`                              |
//! | 4      | 4             | width (`u32`)                             |
//! | 8      | 4             | height (`u32`)                            |
//! | 12     | 4             | number of labels `L` (`u32`)              |
//! | 16     | 4 * w * h * L | `f32` probabilities, pixel-major then label |

use std::path::Path;

use crate::crf::ProbField;
use crate::error::{Error, Result};

pub const PFLD_MAGIC: &[u8; 4] = b"PFLD";

/// Largest per-pixel deviation of the stored sums from 1 that is silently
/// renormalized.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;

const HEADER_LEN: usize = 16;

pub fn encode_probfield(q: &ProbField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * q.data().len());
    out.extend_from_slice(PFLD_MAGIC);
    for v in [q.width(), q.height(), q.num_labels()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for &p in q.data() {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out
}

/// Decodes a PFLD buffer. Errors carry the byte offset of the problem.
pub fn decode_probfield(bytes: &[u8]) -> Result<ProbField> {
    let bad = |offset: usize, message: String| Error::Binary { offset, message };
    if bytes.len() < HEADER_LEN {
        return Err(bad(
            bytes.len(),
            format!("header truncated at {} of {HEADER_LEN} bytes", bytes.len()),
        ));
    }
    if &bytes[..4] != PFLD_MAGIC {
        return Err(bad(0, "bad magic, expected 'PFLD'".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let (w, h, l) = (word(0), word(1), word(2));
    if w == 0 || h == 0 || l == 0 {
        return Err(bad(4, format!("dimensions {w}x{h}x{l} must be positive")));
    }
    let count = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(l))
        .ok_or_else(|| bad(4, "dimensions overflow".into()))?;
    let expected = count
        .checked_mul(4)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| bad(4, "dimensions overflow".into()))?;
    if bytes.len() != expected {
        let what = if bytes.len() < expected {
            "truncated"
        } else {
            "has trailing bytes"
        };
        return Err(bad(
            bytes.len().min(expected),
            format!("payload {what}: {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(count);
    for (k, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(bad(HEADER_LEN + 4 * k, format!("value {v} is not a probability")));
        }
        data.push(v as f64);
    }
    for (i, px) in data.chunks_exact_mut(l).enumerate() {
        let sum: f64 = px.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(bad(
                HEADER_LEN + 4 * l * i,
                format!("pixel {i} sums to {sum}, beyond the renormalization tolerance"),
            ));
        }
        px.iter_mut().for_each(|v| *v /= sum);
    }
    ProbField::new(w, h, l, data)
}

pub fn load_probfield(path: impl AsRef<Path>) -> Result<ProbField> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_probfield(&bytes).map_err(|e| match e {
        Error::Binary { offset, message } => Error::format(path, format!("byte {offset}: {message}")),
        other => other,
    })
}

pub fn save_probfield(path: impl AsRef<Path>, q: &ProbField) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_probfield(q)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(w: u32, h: u32, l: u32, vals: &[f32]) -> Vec<u8> {
        let mut b = PFLD_MAGIC.to_vec();
        for v in [w, h, l] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for v in vals {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn two_label_pixel_round_trips_bytewise() {
        let bytes = raw(1, 1, 2, &[0.6, 0.4]);
        let q = decode_probfield(&bytes).unwrap();
        assert_eq!(encode_probfield(&q), bytes);
        assert!((q.at(0, 0)[0] - 0.6).abs() < 1e-7);
    }

    #[test]
    fn near_unit_sums_are_renormalized() {
        let q = decode_probfield(&raw(1, 1, 2, &[0.6005, 0.4])).unwrap();
        assert!((q.at(0, 0)[0] + q.at(0, 0)[1] - 1.0).abs() < 1e-12);
        assert!(q.at(0, 0)[0] < 0.6005);
        assert!(decode_probfield(&raw(1, 1, 2, &[0.61, 0.4])).is_err());
    }

    #[test]
    fn malformed_buffers_are_rejected() {
        let good = raw(2, 1, 2, &[0.5, 0.5, 1.0, 0.0]);
        let mut magic = good.clone();
        magic[0] = b'X';
        assert!(matches!(decode_probfield(&magic), Err(Error::Binary { offset: 0, .. })));
        for cut in [0, 3, 15, 16, 17, good.len() - 1] {
            assert!(decode_probfield(&good[..cut]).is_err(), "cut {cut}");
        }
        let mut extra = good.clone();
        extra.push(0);
        assert!(decode_probfield(&extra).is_err());
        assert!(decode_probfield(&raw(1, 1, 2, &[1.5, -0.5])).is_err());
        assert!(decode_probfield(&raw(1, 1, 2, &[f32::NAN, 0.5])).is_err());
        assert!(decode_probfield(&raw(0, 1, 2, &[])).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_stays_within_f32_precision(scores in proptest::collection::vec(0.01f64..1.0, 3 * 2 * 4)) {
            let q = ProbField::from_scores(3, 2, 4, scores).unwrap();
            let back = decode_probfield(&encode_probfield(&q)).unwrap();
            prop_assert!(back.max_abs_diff(&q) < 2e-7);
        }
    }
}
