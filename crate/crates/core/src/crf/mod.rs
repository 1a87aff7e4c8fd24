//! Dense fully connected CRF refinement of soft label fields.
//!
//! The pairwise kernel between pixels `i` and `j` is a weighted sum of
//!
//! * a spatial smoothness Gaussian `w_s exp(-|p_i-p_j|^2 / 2θγ^2)`,
//! * an optional color bilateral term
//!   `w_c exp(-|p_i-p_j|^2 / 2θα^2 - |I_i-I_j|^2 / 2θβ^2)`,
//! * an optional depth bilateral term of the same form with the color
//!   difference replaced by the depth difference and `θδ`.
//!
//! Labels interact through a Potts compatibility. Mean-field inference
//! starts from the unary distribution and repeats
//! `Q_i(l) ∝ exp(log U_i(l) - Σ_{l'≠l} m_i(l'))` where
//! `m_i(l) = Σ_{j≠i} k(i,j) Q_j(l)`.
//!
//! [`pairwise_message_brute`] evaluates the messages exactly in `O(N^2)` and
//! is the reference. [`mean_field_infer`] uses a precomputed kernel matrix for
//! small frames and switches to separable smoothing plus permutohedral-lattice
//! bilateral filtering for large ones.

mod field;
mod lattice;
mod mask;

pub use field::{ProbField, SUM_TOLERANCE};
pub use lattice::Lattice;
pub use mask::{binarize_movable, dilate_mask, BinaryMask, MovableClassSet, VOC_LABELS, VOC_MOVABLE};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::imaging::{ColorImage, DepthImage};

/// Largest frame (in pixels) handled with a dense precomputed kernel matrix.
pub const EXACT_MAX_PIXELS: usize = 2048;

/// Spatial truncation of the separable smoothness filter, in standard
/// deviations. `exp(-r^2/2)` is below `1e-16` here.
const SMOOTH_TRUNCATION_SIGMAS: f64 = 8.6;

/// Which pairwise bilateral terms are active, named after the image they use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelConfig {
    /// Color bilateral term only (`c`).
    Color,
    /// Depth bilateral term only (`d`).
    Depth,
    /// Both bilateral terms (`c,d`).
    ColorDepth,
}

impl KernelConfig {
    pub fn uses_color(self) -> bool {
        matches!(self, KernelConfig::Color | KernelConfig::ColorDepth)
    }

    pub fn uses_depth(self) -> bool {
        matches!(self, KernelConfig::Depth | KernelConfig::ColorDepth)
    }
}

impl FromStr for KernelConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "c" => Ok(KernelConfig::Color),
            "d" => Ok(KernelConfig::Depth),
            "c,d" | "d,c" => Ok(KernelConfig::ColorDepth),
            other => Err(Error::invalid(format!(
                "unknown kernel configuration '{other}' (expected c, d or c,d)"
            ))),
        }
    }
}

impl fmt::Display for KernelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelConfig::Color => "c",
            KernelConfig::Depth => "d",
            KernelConfig::ColorDepth => "c,d",
        })
    }
}

/// How [`mean_field_infer`] evaluates messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMethod {
    /// Dense kernel matrix up to [`EXACT_MAX_PIXELS`], lattice above.
    #[default]
    Auto,
    /// Dense precomputed kernel matrix regardless of size.
    Exact,
    /// Separable smoothing and lattice bilateral filtering regardless of size.
    Lattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    pub use_color_kernel: bool,
    pub use_depth_kernel: bool,
    pub w_smooth: f64,
    pub w_color: f64,
    pub w_depth: f64,
    /// Smoothness spatial std-dev, pixels.
    pub theta_gamma: f64,
    /// Bilateral spatial std-dev, pixels.
    pub theta_alpha: f64,
    /// Color std-dev, intensity units.
    pub theta_beta: f64,
    /// Depth std-dev, meters.
    pub theta_delta: f64,
    pub iterations: usize,
    pub method: FilterMethod,
}

impl Default for CrfParams {
    fn default() -> Self {
        Self {
            use_color_kernel: true,
            use_depth_kernel: false,
            w_smooth: 3.0,
            w_color: 5.0,
            w_depth: 5.0,
            theta_gamma: 3.0,
            theta_alpha: 50.0,
            theta_beta: 13.0,
            theta_delta: 0.3,
            iterations: 5,
            method: FilterMethod::Auto,
        }
    }
}

impl CrfParams {
    pub fn with_kernels(mut self, kernels: KernelConfig) -> Self {
        self.use_color_kernel = kernels.uses_color();
        self.use_depth_kernel = kernels.uses_depth();
        self
    }

    fn color_active(&self) -> bool {
        self.use_color_kernel && self.w_color > 0.0
    }

    fn depth_active(&self) -> bool {
        self.use_depth_kernel && self.w_depth > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_gamma", self.theta_gamma),
            ("theta_alpha", self.theta_alpha),
            ("theta_beta", self.theta_beta),
            ("theta_delta", self.theta_delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("w_smooth", self.w_smooth),
            ("w_color", self.w_color),
            ("w_depth", self.w_depth),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    fn validate_for_inference(&self) -> Result<()> {
        self.validate()?;
        if self.iterations > 0 && !(self.w_smooth > 0.0 || self.color_active() || self.depth_active()) {
            return Err(Error::invalid(
                "mean-field iterations need at least one kernel with positive weight",
            ));
        }
        Ok(())
    }
}

/// Per-pixel per-label pairwise messages, pixel-major like [`ProbField`].
#[derive(Debug, Clone, PartialEq)]
pub struct Messages {
    pub num_labels: usize,
    pub data: Vec<f64>,
}

impl Messages {
    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_labels..(i + 1) * self.num_labels]
    }
}

struct Inputs<'a> {
    width: usize,
    color: Option<&'a ColorImage>,
    depth: Option<&'a DepthImage>,
}

fn check_inputs<'a>(
    q: &ProbField,
    color: Option<&'a ColorImage>,
    depth: Option<&'a DepthImage>,
    params: &CrfParams,
) -> Result<Inputs<'a>> {
    let (w, h) = (q.width(), q.height());
    if let Some(c) = color {
        if (c.width(), c.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected_width: w,
                expected_height: h,
                width: c.width(),
                height: c.height(),
            });
        }
    }
    if let Some(d) = depth {
        if (d.width(), d.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected_width: w,
                expected_height: h,
                width: d.width(),
                height: d.height(),
            });
        }
    }
    if params.use_color_kernel && color.is_none() {
        return Err(Error::invalid("color kernel enabled without a color image"));
    }
    if params.use_depth_kernel && depth.is_none() {
        return Err(Error::invalid("depth kernel enabled without a depth image"));
    }
    Ok(Inputs {
        width: w,
        color: if params.use_color_kernel { color } else { None },
        depth: if params.use_depth_kernel { depth } else { None },
    })
}

/// Full kernel value `k(i, j)` for `i != j`.
#[inline]
fn pair_kernel(params: &CrfParams, inputs: &Inputs<'_>, i: usize, j: usize) -> f64 {
    let w = inputs.width;
    let dx = (i % w) as f64 - (j % w) as f64;
    let dy = (i / w) as f64 - (j / w) as f64;
    let dp2 = dx * dx + dy * dy;
    let mut k = 0.0;
    if params.w_smooth > 0.0 {
        k += params.w_smooth * (-(dp2 / (2.0 * params.theta_gamma * params.theta_gamma))).exp();
    }
    if let Some(color) = inputs.color.filter(|_| params.w_color > 0.0) {
        let a = color.data();
        let dc2: f64 = (0..3)
            .map(|c| {
                let d = a[3 * i + c] as f64 - a[3 * j + c] as f64;
                d * d
            })
            .sum();
        let spatial = dp2 / (2.0 * params.theta_alpha * params.theta_alpha);
        k += params.w_color * (-(spatial + dc2 / (2.0 * params.theta_beta * params.theta_beta))).exp();
    }
    if let Some(depth) = inputs.depth.filter(|_| params.w_depth > 0.0) {
        let (di, dj) = (depth.data()[i] as f64, depth.data()[j] as f64);
        if di > 0.0 && dj > 0.0 {
            let dd2 = (di - dj) * (di - dj);
            let spatial = dp2 / (2.0 * params.theta_alpha * params.theta_alpha);
            k += params.w_depth * (-(spatial + dd2 / (2.0 * params.theta_delta * params.theta_delta))).exp();
        }
    }
    k
}

/// Exact `O(N^2)` message evaluation, recomputing every kernel value.
pub fn pairwise_message_brute(
    q: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
) -> Result<Messages> {
    params.validate()?;
    let inputs = check_inputs(q, color, depth, params)?;
    let n = q.num_pixels();
    let l = q.num_labels();
    let mut data = vec![0.0; n * l];
    for i in 0..n {
        let out = &mut data[i * l..(i + 1) * l];
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = pair_kernel(params, &inputs, i, j);
            if k == 0.0 {
                continue;
            }
            for (o, qj) in out.iter_mut().zip(q.pixel(j)) {
                *o += k * qj;
            }
        }
    }
    Ok(Messages { num_labels: l, data })
}

/// One Potts mean-field update from `log_unary` and `messages`.
fn potts_update(log_unary: &[f64], messages: &[f64], l: usize, out: &mut [f64]) {
    let mut scratch = vec![0.0f64; l];
    for ((lu, m), o) in log_unary
        .chunks_exact(l)
        .zip(messages.chunks_exact(l))
        .zip(out.chunks_exact_mut(l))
    {
        let total: f64 = m.iter().sum();
        let mut max = f64::NEG_INFINITY;
        for k in 0..l {
            // compat(l, l') = -1 for l' != l.
            scratch[k] = lu[k] - (total - m[k]);
            max = max.max(scratch[k]);
        }
        let mut sum = 0.0;
        for v in scratch.iter_mut().take(l) {
            *v = (*v - max).exp();
            sum += *v;
        }
        for k in 0..l {
            o[k] = scratch[k] / sum;
        }
    }
}

fn log_unary(unary: &ProbField) -> Vec<f64> {
    unary.data().iter().map(|p| p.ln()).collect()
}

/// Mean-field iterates `Q^0 ..= Q^T` driven by [`pairwise_message_brute`].
pub fn mean_field_trace_brute(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
) -> Result<Vec<ProbField>> {
    params.validate_for_inference()?;
    check_inputs(unary, color, depth, params)?;
    let lu = log_unary(unary);
    let mut trace = vec![unary.clone()];
    for _ in 0..params.iterations {
        let msg = pairwise_message_brute(trace.last().unwrap(), color, depth, params)?;
        let mut next = vec![0.0; lu.len()];
        potts_update(&lu, &msg.data, unary.num_labels(), &mut next);
        trace.push(ProbField::from_normalized_unchecked(
            unary.width(),
            unary.height(),
            unary.num_labels(),
            next,
        ));
    }
    Ok(trace)
}

pub fn mean_field_infer_brute(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
) -> Result<ProbField> {
    Ok(mean_field_trace_brute(unary, color, depth, params)?.pop().unwrap())
}

/// Symmetric `N x N` kernel matrix with a zero diagonal.
struct DenseKernel {
    n: usize,
    k: Vec<f64>,
}

impl DenseKernel {
    fn new(params: &CrfParams, inputs: &Inputs<'_>, n: usize) -> Self {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = pair_kernel(params, inputs, i, j);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Self { n, k }
    }

    fn messages(&self, q: &[f64], l: usize, out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.k[i * self.n..(i + 1) * self.n];
            let o = &mut out[i * l..(i + 1) * l];
            o.iter_mut().for_each(|v| *v = 0.0);
            for (j, &kij) in row.iter().enumerate() {
                if kij == 0.0 {
                    continue;
                }
                for (ov, qv) in o.iter_mut().zip(&q[j * l..(j + 1) * l]) {
                    *ov += kij * qv;
                }
            }
        }
    }
}

/// Separable spatial Gaussian over the full label field.
struct SeparableSmoothing {
    width: usize,
    height: usize,
    weight: f64,
    taps: Vec<f64>,
}

impl SeparableSmoothing {
    fn new(width: usize, height: usize, weight: f64, sigma: f64) -> Self {
        let radius = ((SMOOTH_TRUNCATION_SIGMAS * sigma).ceil() as usize).min(width.max(height));
        let taps = (0..=radius)
            .map(|r| (-((r * r) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        Self {
            width,
            height,
            weight,
            taps,
        }
    }

    /// Adds `w * (G * q - q)` to `out`.
    fn accumulate(&self, q: &[f64], l: usize, out: &mut [f64]) {
        let (w, h) = (self.width, self.height);
        let r = self.taps.len() - 1;
        let mut rows = vec![0.0; q.len()];
        for y in 0..h {
            for x in 0..w {
                let dst = &mut rows[(y * w + x) * l..(y * w + x + 1) * l];
                let lo = x.saturating_sub(r);
                let hi = (x + r).min(w - 1);
                for sx in lo..=hi {
                    let t = self.taps[x.abs_diff(sx)];
                    let src = &q[(y * w + sx) * l..(y * w + sx + 1) * l];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += t * s;
                    }
                }
            }
        }
        for y in 0..h {
            let lo = y.saturating_sub(r);
            let hi = (y + r).min(h - 1);
            for x in 0..w {
                let i = y * w + x;
                let mut acc = vec![0.0; l];
                for sy in lo..=hi {
                    let t = self.taps[y.abs_diff(sy)];
                    let src = &rows[(sy * w + x) * l..(sy * w + x + 1) * l];
                    for (a, s) in acc.iter_mut().zip(src) {
                        *a += t * s;
                    }
                }
                for k in 0..l {
                    out[i * l + k] += self.weight * (acc[k] - q[i * l + k]);
                }
            }
        }
    }
}

/// A bilateral term evaluated on a permutohedral lattice over a subset of
/// pixels, with a gain fitted against exact kernel sums at sample pixels.
struct LatticeTerm {
    lattice: Lattice,
    pixels: Vec<usize>,
    weight: f64,
    gain: f64,
}

impl LatticeTerm {
    /// `features` holds one row of `dim` scaled features per entry of `pixels`.
    fn new(pixels: Vec<usize>, features: Vec<f64>, dim: usize, weight: f64) -> Self {
        let lattice = Lattice::new(&features, dim);
        let m = pixels.len();
        let ones = vec![1.0; m];
        let mut approx = vec![0.0; m];
        lattice.filter(&ones, 1, &mut approx);
        let samples = 64.min(m);
        let (mut exact_sum, mut approx_sum) = (0.0, 0.0);
        for s in 0..samples {
            let a = s * m / samples;
            let fa = &features[a * dim..(a + 1) * dim];
            exact_sum += features
                .chunks_exact(dim)
                .map(|fb| {
                    let d2: f64 = fa.iter().zip(fb).map(|(x, y)| (x - y) * (x - y)).sum();
                    (-0.5 * d2).exp()
                })
                .sum::<f64>();
            approx_sum += approx[a];
        }
        let gain = if approx_sum > 0.0 { exact_sum / approx_sum } else { 1.0 };
        Self {
            lattice,
            pixels,
            weight,
            gain,
        }
    }

    fn accumulate(&self, q: &[f64], l: usize, out: &mut [f64]) {
        if self.pixels.is_empty() {
            return;
        }
        let mut vals = Vec::with_capacity(self.pixels.len() * l);
        for &p in &self.pixels {
            vals.extend_from_slice(&q[p * l..(p + 1) * l]);
        }
        let mut filtered = vec![0.0; vals.len()];
        self.lattice.filter(&vals, l, &mut filtered);
        for (idx, &p) in self.pixels.iter().enumerate() {
            for k in 0..l {
                let v = self.gain * filtered[idx * l + k] - vals[idx * l + k];
                out[p * l + k] += self.weight * v.max(0.0);
            }
        }
    }
}

enum Engine {
    Dense(DenseKernel),
    Filtered {
        smooth: Vec<SeparableSmoothing>,
        bilateral: Vec<LatticeTerm>,
    },
}

impl Engine {
    fn new(q: &ProbField, params: &CrfParams, inputs: &Inputs<'_>) -> Self {
        let n = q.num_pixels();
        let dense = match params.method {
            FilterMethod::Auto => n <= EXACT_MAX_PIXELS,
            FilterMethod::Exact => true,
            FilterMethod::Lattice => false,
        };
        if dense {
            return Engine::Dense(DenseKernel::new(params, inputs, n));
        }
        let (w, h) = (q.width(), q.height());
        let mut smooth: Vec<SeparableSmoothing> = (params.w_smooth > 0.0)
            .then(|| SeparableSmoothing::new(w, h, params.w_smooth, params.theta_gamma))
            .into_iter()
            .collect();
        let mut bilateral = Vec::new();
        let sa = 1.0 / params.theta_alpha;
        if let Some(color) = inputs.color.filter(|_| params.w_color > 0.0) {
            let sb = 1.0 / params.theta_beta;
            let mut feats = Vec::with_capacity(n * 5);
            for i in 0..n {
                let c = &color.data()[3 * i..3 * i + 3];
                feats.extend_from_slice(&[
                    (i % w) as f64 * sa,
                    (i / w) as f64 * sa,
                    c[0] as f64 * sb,
                    c[1] as f64 * sb,
                    c[2] as f64 * sb,
                ]);
            }
            bilateral.push(LatticeTerm::new((0..n).collect(), feats, 5, params.w_color));
        }
        if let Some(depth) = inputs.depth.filter(|_| params.w_depth > 0.0) {
            let sd = 1.0 / params.theta_delta;
            let d = depth.data();
            if d.first().is_some_and(|&d0| d0 > 0.0 && d.iter().all(|&v| v == d0)) {
                // A flat, fully valid depth map leaves only the spatial factor.
                smooth.push(SeparableSmoothing::new(w, h, params.w_depth, params.theta_alpha));
                return Engine::Filtered { smooth, bilateral };
            }
            let pixels: Vec<usize> = (0..n).filter(|&i| depth.data()[i] > 0.0).collect();
            let mut feats = Vec::with_capacity(pixels.len() * 3);
            for &i in &pixels {
                feats.extend_from_slice(&[(i % w) as f64 * sa, (i / w) as f64 * sa, depth.data()[i] as f64 * sd]);
            }
            bilateral.push(LatticeTerm::new(pixels, feats, 3, params.w_depth));
        }
        Engine::Filtered { smooth, bilateral }
    }

    fn messages(&self, q: &[f64], l: usize, out: &mut [f64]) {
        match self {
            Engine::Dense(k) => k.messages(q, l, out),
            Engine::Filtered { smooth, bilateral } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for s in smooth {
                    s.accumulate(q, l, out);
                }
                for term in bilateral {
                    term.accumulate(q, l, out);
                }
            }
        }
    }
}

/// Mean-field iterates `Q^0 ..= Q^T` on the fast path.
pub fn mean_field_trace(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
) -> Result<Vec<ProbField>> {
    let mut trace = vec![unary.clone()];
    run_fast(unary, color, depth, params, |q| trace.push(q.clone()))?;
    Ok(trace)
}

pub fn mean_field_infer(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
) -> Result<ProbField> {
    let mut last = None;
    run_fast(unary, color, depth, params, |q| last = Some(q.clone()))?;
    Ok(last.unwrap_or_else(|| unary.clone()))
}

fn run_fast(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
    mut on_iterate: impl FnMut(&ProbField),
) -> Result<()> {
    params.validate_for_inference()?;
    let inputs = check_inputs(unary, color, depth, params)?;
    if params.iterations == 0 {
        return Ok(());
    }
    let engine = Engine::new(unary, params, &inputs);
    let l = unary.num_labels();
    let lu = log_unary(unary);
    let mut q = unary.data().to_vec();
    let mut msg = vec![0.0; q.len()];
    for _ in 0..params.iterations {
        engine.messages(&q, l, &mut msg);
        potts_update(&lu, &msg, l, &mut q);
        on_iterate(&ProbField::from_normalized_unchecked(
            unary.width(),
            unary.height(),
            l,
            q.clone(),
        ));
    }
    Ok(())
}

/// CRF refinement followed by movable-class binarization and dilation. The
/// unary field is resampled to the frame size first when they differ.
pub fn refine_mask(
    unary: &ProbField,
    color: Option<&ColorImage>,
    depth: Option<&DepthImage>,
    params: &CrfParams,
    classes: &MovableClassSet,
    dilation: usize,
) -> Result<BinaryMask> {
    let frame = color
        .map(|c| (c.width(), c.height()))
        .or(depth.map(|d| (d.width(), d.height())));
    let unary = match frame {
        Some((w, h)) => unary.resample(w, h),
        None => unary.clone(),
    };
    let q = mean_field_infer(&unary, color, depth, params)?;
    Ok(dilate_mask(&binarize_movable(&q, classes)?, dilation))
}
