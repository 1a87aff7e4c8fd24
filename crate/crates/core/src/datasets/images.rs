//! Image file I/O. PNG and binary PGM/PPM are accepted everywhere; the
//! writers pick the container from the file extension.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{GraymapHeader, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::crf::BinaryMask;
use crate::error::{Error, Result};
use crate::imaging::{ColorImage, DepthImage, GrayImage};

fn decode(path: &Path) -> Result<DynamicImage> {
    let image_err = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(image_err)
}

fn is_pnm(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm" | "ppm" | "pnm")
    )
}

fn encode(path: &Path, bytes: &[u8], width: usize, height: usize, color: ExtendedColorType) -> Result<()> {
    let image_err = |source| Error::Image {
        path: path.to_path_buf(),
        source,
    };
    let (w, h) = (width as u32, height as u32);
    if is_pnm(path) {
        let out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        let enc = PnmEncoder::new(out);
        let enc = match color {
            ExtendedColorType::L16 => enc.with_header(
                GraymapHeader {
                    encoding: SampleEncoding::Binary,
                    width: w,
                    height: h,
                    maxwhite: u16::MAX as u32,
                }
                .into(),
            ),
            ExtendedColorType::Rgb8 => enc.with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary)),
            _ => enc.with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary)),
        };
        enc.write_image(bytes, w, h, color).map_err(image_err)
    } else {
        image::save_buffer(path, bytes, w, h, color).map_err(image_err)
    }
}

pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = decode(path)?.into_luma8();
    GrayImage::new(img.width() as usize, img.height() as usize, img.into_raw())
}

/// Loads any 8-bit image as RGB; single-channel files are replicated.
pub fn load_color(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let img = decode(path)?.into_rgb8();
    ColorImage::new(img.width() as usize, img.height() as usize, img.into_raw())
}

pub fn save_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    encode(
        path.as_ref(),
        img.data(),
        img.width(),
        img.height(),
        ExtendedColorType::L8,
    )
}

pub fn save_color(path: impl AsRef<Path>, img: &ColorImage) -> Result<()> {
    encode(
        path.as_ref(),
        img.data(),
        img.width(),
        img.height(),
        ExtendedColorType::Rgb8,
    )
}

/// Reads a 16-bit single-channel depth image; `raw / depth_factor` meters,
/// raw 0 meaning missing.
pub fn load_depth(path: impl AsRef<Path>, depth_factor: f64) -> Result<DepthImage> {
    let path = path.as_ref();
    if !(depth_factor > 0.0) {
        return Err(Error::invalid(format!("depth factor {depth_factor} must be positive")));
    }
    let img = match decode(path)? {
        DynamicImage::ImageLuma16(img) => img,
        other => {
            return Err(Error::format(
                path,
                format!("depth must be 16-bit single-channel, found {:?}", other.color()),
            ))
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img
        .into_raw()
        .into_iter()
        .map(|raw| (raw as f64 / depth_factor) as f32)
        .collect();
    DepthImage::new(w, h, data)
}

/// Writes depth as 16-bit raw units, rounding to the nearest unit.
pub fn save_depth(path: impl AsRef<Path>, depth: &DepthImage, depth_factor: f64) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(depth.data().len() * 2);
    for &m in depth.data() {
        let raw = (m as f64 * depth_factor).round();
        if raw > u16::MAX as f64 {
            return Err(Error::invalid(format!(
                "depth {m} m overflows 16-bit storage at factor {depth_factor}"
            )));
        }
        bytes.extend_from_slice(&(raw as u16).to_ne_bytes());
    }
    encode(path, &bytes, depth.width(), depth.height(), ExtendedColorType::L16)
}

/// 8-bit mask file: 0 static, 255 movable. Any nonzero value loads as movable.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let g = load_gray(path)?;
    BinaryMask::new(g.width(), g.height(), g.data().iter().map(|&v| v != 0).collect())
}

pub fn save_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    let bytes: Vec<u8> = mask.data().iter().map(|&m| if m { 255 } else { 0 }).collect();
    encode(
        path.as_ref(),
        &bytes,
        mask.width(),
        mask.height(),
        ExtendedColorType::L8,
    )
}
