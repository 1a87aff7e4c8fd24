//! In-memory images, grayscale conversion, Gaussian smoothing and scale
//! pyramids.
//!
//! All containers are row-major and immutable once built; constructors
//! validate the buffer length against the stated dimensions.

use crate::error::{Error, Result};

/// Smallest side length allowed at the coarsest pyramid level. A 31x31
/// descriptor patch plus one pixel of slack must fit.
pub const MIN_LEVEL_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "gray buffer has {} bytes, expected {}",
                data.len(),
                width * height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped to the image (replicated border).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Bilinear interpolation at a real-valued position, replicated border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let p00 = self.get_clamped(xi, yi) as f64;
        let p10 = self.get_clamped(xi + 1, yi) as f64;
        let p01 = self.get_clamped(xi, yi + 1) as f64;
        let p11 = self.get_clamped(xi + 1, yi + 1) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }

    /// Replicates the gray value into all three channels.
    pub fn to_color(&self) -> ColorImage {
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v]);
        }
        ColorImage {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != 3 * width * height {
            return Err(Error::invalid(format!(
                "rgb buffer has {} bytes, expected {}",
                data.len(),
                3 * width * height
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Depth in meters; `0.0` marks a missing measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "depth buffer has {} values, expected {}",
                data.len(),
                width * height
            )));
        }
        if let Some(bad) = data.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::invalid(format!(
                "depth value {bad} is not a finite nonnegative number"
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, meters: f32) -> Self {
        Self::new(width, height, vec![meters; width * height]).expect("valid constant depth")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }
}

#[derive(Debug, Clone)]
pub struct ImagePyramid {
    levels: Vec<GrayImage>,
    scale_factor: f64,
    level_scales: Vec<f64>,
}

impl ImagePyramid {
    pub fn levels(&self) -> &[GrayImage] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &GrayImage {
        &self.levels[k]
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale_factor
    }

    /// `scale_factor^k` for every level `k`.
    pub fn level_scales(&self) -> &[f64] {
        &self.level_scales
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions {width}x{height} must be positive"
        )));
    }
    Ok(())
}

/// Luma conversion with weights 0.299/0.587/0.114, rounded to nearest.
pub fn to_gray(img: &ColorImage) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let l = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            l.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Size of pyramid level with cumulative scale `scale`.
pub fn scaled_size(size: usize, scale: f64) -> usize {
    // The epsilon keeps exact quotients such as 120/1.2 from flooring to 99.
    ((size as f64) / scale + 1e-9).floor() as usize
}

pub fn build_pyramid(img: &GrayImage, nlevels: usize, scale_factor: f64) -> Result<ImagePyramid> {
    if nlevels == 0 {
        return Err(Error::invalid("pyramid needs at least one level"));
    }
    if !(scale_factor > 1.0) || !scale_factor.is_finite() {
        return Err(Error::invalid(format!("scale factor {scale_factor} must be > 1")));
    }
    let level_scales: Vec<f64> = (0..nlevels).map(|k| scale_factor.powi(k as i32)).collect();
    let coarsest = level_scales[nlevels - 1];
    let (cw, ch) = (scaled_size(img.width, coarsest), scaled_size(img.height, coarsest));
    if cw < MIN_LEVEL_SIZE || ch < MIN_LEVEL_SIZE {
        return Err(Error::ImageTooSmall {
            width: cw,
            height: ch,
            level: nlevels - 1,
            min: MIN_LEVEL_SIZE,
        });
    }

    let mut levels = Vec::with_capacity(nlevels);
    levels.push(img.clone());
    for &scale in &level_scales[1..] {
        levels.push(resize_bilinear(
            img,
            scaled_size(img.width, scale),
            scaled_size(img.height, scale),
        ));
    }
    Ok(ImagePyramid {
        levels,
        scale_factor,
        level_scales,
    })
}

/// Pixel-center aligned bilinear resampling to `width`x`height`.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    if width == img.width && height == img.height {
        return img.clone();
    }
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    GrayImage::from_fn(width, height, |x, y| {
        let src_x = (x as f64 + 0.5) * sx - 0.5;
        let src_y = (y as f64 + 0.5) * sy - 0.5;
        img.sample_bilinear(src_x, src_y).round().clamp(0.0, 255.0) as u8
    })
}

/// Normalized 1-D Gaussian taps for radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|w| *w /= sum);
    taps
}

/// Separable Gaussian blur with replicated borders, rounded to 8 bits.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let blurred = gaussian_blur_f64(img, sigma)?;
    Ok(GrayImage {
        width: img.width,
        height: img.height,
        data: blurred.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect(),
    })
}

/// The unrounded result of [`gaussian_blur`].
pub fn gaussian_blur_f64(img: &GrayImage, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma {sigma} must be > 0")));
    }
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as isize;
    let (w, h) = (img.width, img.height);

    let mut horizontal = vec![0.0f64; w * h];
    for y in 0..h {
        let row = &img.data[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sx = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += t * row[sx] as f64;
            }
            horizontal[y * w + x] = acc;
        }
    }

    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &t) in taps.iter().enumerate() {
                let sy = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += t * horizontal[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Ok(out)
}
