use crate::error::{Error, Result};

/// Tolerance on per-pixel probability sums accepted by [`ProbField::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Per-pixel probability vectors over `num_labels` classes, pixel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbField {
    width: usize,
    height: usize,
    num_labels: usize,
    data: Vec<f64>,
}

impl ProbField {
    pub fn new(width: usize, height: usize, num_labels: usize, data: Vec<f64>) -> Result<Self> {
        let field = Self::unchecked(width, height, num_labels, data)?;
        for (i, p) in field.data.chunks_exact(num_labels).enumerate() {
            if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(format!("pixel {i} has an entry outside [0, 1]")));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::invalid(format!("pixel {i} sums to {sum}, not 1")));
            }
        }
        Ok(field)
    }

    fn unchecked(width: usize, height: usize, num_labels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || num_labels == 0 {
            return Err(Error::invalid(format!(
                "probability field {width}x{height}x{num_labels} has an empty dimension"
            )));
        }
        if data.len() != width * height * num_labels {
            return Err(Error::invalid(format!(
                "probability field buffer has {} values, expected {}",
                data.len(),
                width * height * num_labels
            )));
        }
        Ok(Self {
            width,
            height,
            num_labels,
            data,
        })
    }

    /// Normalizes each pixel's nonnegative scores to sum to one.
    pub fn from_scores(width: usize, height: usize, num_labels: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("scores must be finite and nonnegative"));
        }
        for p in data.chunks_exact_mut(num_labels.max(1)) {
            let sum: f64 = p.iter().sum();
            if sum <= 0.0 {
                return Err(Error::invalid("a pixel has all-zero scores"));
            }
            p.iter_mut().for_each(|v| *v /= sum);
        }
        Self::new(width, height, num_labels, data)
    }

    pub fn uniform(width: usize, height: usize, num_labels: usize) -> Self {
        let v = 1.0 / num_labels as f64;
        Self::unchecked(width, height, num_labels, vec![v; width * height * num_labels])
            .expect("nonempty uniform field")
    }

    /// Every pixel certain of `label`.
    pub fn one_hot(width: usize, height: usize, num_labels: usize, label: usize) -> Self {
        assert!(label < num_labels);
        let mut data = vec![0.0; width * height * num_labels];
        for p in data.chunks_exact_mut(num_labels) {
            p[label] = 1.0;
        }
        Self::unchecked(width, height, num_labels, data).expect("nonempty one-hot field")
    }

    pub(crate) fn from_normalized_unchecked(width: usize, height: usize, num_labels: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * num_labels);
        Self {
            width,
            height,
            num_labels,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_labels..(i + 1) * self.num_labels]
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &[f64] {
        self.pixel(y * self.width + x)
    }

    /// Index of the most probable label; ties go to the lowest index.
    pub fn argmax(&self, i: usize) -> usize {
        let p = self.pixel(i);
        let mut best = 0;
        for (l, &v) in p.iter().enumerate().skip(1) {
            if v > p[best] {
                best = l;
            }
        }
        best
    }

    /// Largest absolute entrywise difference to a field of equal shape.
    pub fn max_abs_diff(&self, other: &ProbField) -> f64 {
        assert_eq!(
            (self.width, self.height, self.num_labels),
            (other.width, other.height, other.num_labels)
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Reorders labels so that new label `k` is old label `perm[k]`.
    pub fn permute_labels(&self, perm: &[usize]) -> ProbField {
        assert_eq!(perm.len(), self.num_labels);
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.data.chunks_exact(self.num_labels) {
            data.extend(perm.iter().map(|&src| p[src]));
        }
        Self::from_normalized_unchecked(self.width, self.height, self.num_labels, data)
    }

    /// Pixel-center aligned bilinear resampling of every label channel,
    /// renormalized per pixel.
    pub fn resample(&self, width: usize, height: usize) -> ProbField {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let l = self.num_labels;
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let clamp_x = |v: isize| v.clamp(0, self.width as isize - 1) as usize;
        let clamp_y = |v: isize| v.clamp(0, self.height as isize - 1) as usize;
        let mut data = Vec::with_capacity(width * height * l);
        for y in 0..height {
            let fy = (y as f64 + 0.5) * sy - 0.5;
            let y0 = fy.floor();
            let wy = fy - y0;
            let (ya, yb) = (clamp_y(y0 as isize), clamp_y(y0 as isize + 1));
            for x in 0..width {
                let fx = (x as f64 + 0.5) * sx - 0.5;
                let x0 = fx.floor();
                let wx = fx - x0;
                let (xa, xb) = (clamp_x(x0 as isize), clamp_x(x0 as isize + 1));
                let start = data.len();
                for k in 0..l {
                    let v00 = self.at(xa, ya)[k];
                    let v10 = self.at(xb, ya)[k];
                    let v01 = self.at(xa, yb)[k];
                    let v11 = self.at(xb, yb)[k];
                    let top = v00 + (v10 - v00) * wx;
                    let bottom = v01 + (v11 - v01) * wx;
                    data.push(top + (bottom - top) * wy);
                }
                let sum: f64 = data[start..].iter().sum();
                data[start..].iter_mut().for_each(|v| *v /= sum);
            }
        }
        Self::from_normalized_unchecked(width, height, l, data)
    }
}
