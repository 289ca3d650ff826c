//! The gradient edge-detection pipeline: convolution with border policies,
//! gradient field assembly (magnitude and direction), thresholding into edge
//! maps, smoothing, and edge-map comparison metrics.
//!
//! Convolution applies masks as written (correlation, no kernel flip), so
//! mask signs carry through to the response unchanged. Output rows are
//! independent and may be computed in parallel; each pixel's inner sum runs
//! in a fixed kernel-index order, so results are bit-identical regardless of
//! worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classic::{gaussian_gradient_masks, prewitt_masks, roberts_masks, sobel_masks, GaussianSpec};
use crate::error::{Error, Result};
use crate::mask::{weibull_gradient_pair, Kernel, MaskKind, SamplingGrid};
use crate::weibull::WeibullParams;

fn checked_area(width: usize, height: usize) -> Result<usize> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    width.checked_mul(height).ok_or_else(|| {
        Error::InvalidImage(format!("dimensions {width}x{height} overflow"))
    })
}

/// A width x height plane of 8-bit intensities, row-major, top to bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    intensities: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, intensities: Vec<u8>) -> Result<Self> {
        let expected = checked_area(width, height)?;
        if intensities.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} intensities for {width}x{height}, got {}",
                intensities.len()
            )));
        }
        Ok(Self {
            width,
            height,
            intensities,
        })
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn intensities(&self) -> &[u8] {
        &self.intensities
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.intensities[row * self.width + col]
    }

    /// Identity embedding of 0-255 into reals; no unit normalization.
    pub fn to_real(&self) -> RealPlane {
        RealPlane {
            width: self.width,
            height: self.height,
            values: self.intensities.iter().map(|&v| v as f64).collect(),
        }
    }
}

/// A width x height plane of 64-bit reals.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPlane {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RealPlane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let expected = checked_area(width, height)?;
        if values.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} values for {width}x{height}, got {}",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Per-pixel gradient responses and the derived magnitude/direction planes.
/// Direction is the four-quadrant angle of `(gy, gx)` in `(-pi, pi]`, with
/// the zero vector mapped to 0.
#[derive(Clone, Debug)]
pub struct GradientField {
    pub gx: RealPlane,
    pub gy: RealPlane,
    pub magnitude: RealPlane,
    pub direction: RealPlane,
}

/// A boolean plane marking detected edge pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, edges: Vec<bool>) -> Result<Self> {
        if checked_area(width, height)? != edges.len() {
            return Err(Error::InvalidImage(format!(
                "edge map shape mismatch: {width}x{height} with {} flags",
                edges.len()
            )));
        }
        Ok(Self {
            width,
            height,
            edges,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn edges(&self) -> &[bool] {
        &self.edges
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.edges[row * self.width + col]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    /// Fraction of pixels marked as edges.
    pub fn density(&self) -> f64 {
        self.edge_count() as f64 / self.edges.len() as f64
    }

    /// Encode as an image: true -> 255, false -> 0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            intensities: self.edges.iter().map(|&e| if e { 255 } else { 0 }).collect(),
        }
    }

    /// Decode from an image: any nonzero intensity marks an edge.
    pub fn from_gray(image: &GrayImage) -> Self {
        Self {
            width: image.width,
            height: image.height,
            edges: image.intensities.iter().map(|&v| v > 0).collect(),
        }
    }
}

/// Rule supplying pixel values outside the image during convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorderPolicy {
    /// Clamp to the nearest edge pixel.
    Replicate,
    /// Mirror without repeating the border pixel.
    Reflect,
    /// Treat outside as 0.
    Zero,
}

impl BorderPolicy {
    /// Map a possibly out-of-range index onto the source axis; `None` means
    /// the sample is 0.
    fn resolve(self, index: isize, len: usize) -> Option<usize> {
        let n = len as isize;
        if (0..n).contains(&index) {
            return Some(index as usize);
        }
        match self {
            BorderPolicy::Replicate => Some(index.clamp(0, n - 1) as usize),
            BorderPolicy::Reflect => {
                if n == 1 {
                    return Some(0);
                }
                let period = 2 * (n - 1);
                let mut k = index.rem_euclid(period);
                if k >= n {
                    k = period - k;
                }
                Some(k as usize)
            }
            BorderPolicy::Zero => None,
        }
    }
}

impl std::str::FromStr for BorderPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicate" => Ok(BorderPolicy::Replicate),
            "reflect" => Ok(BorderPolicy::Reflect),
            "zero" => Ok(BorderPolicy::Zero),
            other => Err(Error::InvalidImage(format!(
                "unknown border policy {other:?} (expected replicate, reflect, or zero)"
            ))),
        }
    }
}

/// How gradient responses combine into an edge-intensity magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientNorm {
    /// `sqrt(gx^2 + gy^2)`
    L2,
    /// `|gx| + |gy|`
    L1,
}

impl std::str::FromStr for GradientNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(GradientNorm::L2),
            "l1" => Ok(GradientNorm::L1),
            other => Err(Error::InvalidImage(format!(
                "unknown norm {other:?} (expected l1 or l2)"
            ))),
        }
    }
}

/// Rule resolving the edge threshold `T`; pixels strictly above `T` are
/// edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdRule {
    Absolute(f64),
    /// Nearest-rank percentile over all magnitude values: `T` is the
    /// `ceil(p/100 * N)`-th smallest value.
    Percentile(f64),
}

impl ThresholdRule {
    fn validate(&self) -> Result<()> {
        match *self {
            ThresholdRule::Absolute(t) => {
                if !t.is_finite() || t < 0.0 {
                    return Err(Error::InvalidThreshold(format!(
                        "absolute threshold must be a nonnegative finite real, got {t}"
                    )));
                }
            }
            ThresholdRule::Percentile(p) => {
                if !(p > 0.0 && p < 100.0) {
                    return Err(Error::InvalidThreshold(format!(
                        "percentile must lie in (0, 100), got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Magnitude of a single gradient sample under the chosen norm.
pub fn magnitude_of(gx: f64, gy: f64, norm: GradientNorm) -> f64 {
    match norm {
        GradientNorm::L2 => (gx * gx + gy * gy).sqrt(),
        GradientNorm::L1 => gx.abs() + gy.abs(),
    }
}

/// Four-quadrant gradient direction in `(-pi, pi]`, 0 at the zero vector.
pub fn direction_of(gx: f64, gy: f64) -> f64 {
    if gx == 0.0 && gy == 0.0 {
        return 0.0;
    }
    let d = gy.atan2(gx);
    if d == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        d
    }
}

fn check_kernel_fits(size: usize, plane_w: usize, plane_h: usize) -> Result<()> {
    if size > plane_w.min(plane_h) {
        return Err(Error::KernelTooLarge {
            kernel: size,
            width: plane_w,
            height: plane_h,
        });
    }
    Ok(())
}

/// 2D correlation of a real plane with a kernel under a border policy.
///
/// `output(r, c) = sum_{i,j} kernel(i, j) * plane(r + i - h, c + j - h)`
/// with `h = (size - 1) / 2`; the mask is applied as written, no flipping.
pub fn convolve(plane: &RealPlane, kernel: &Kernel, border: BorderPolicy) -> Result<RealPlane> {
    check_kernel_fits(kernel.size(), plane.width, plane.height)?;
    let (w, h) = (plane.width, plane.height);
    let n = kernel.size();
    let anchor = kernel.half_width();
    let reach = n - 1 - anchor;

    // Resolve per-axis index maps once; border lookups then reduce to two
    // table reads. None marks a zero sample. Pixels whose window lies fully
    // inside the plane take a direct-indexing path with the same
    // kernel-index order, so results are identical bit for bit.
    let row_map = index_map(border, h, n, anchor as isize);
    let col_map = index_map(border, w, n, anchor as isize);
    let coeffs = kernel.coefficients();

    let mut values = vec![0.0; w * h];
    values
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(r, out_row)| {
            let row_interior = r >= anchor && r + reach < h;
            for (c, out) in out_row.iter_mut().enumerate() {
                let mut acc = 0.0;
                if row_interior && c >= anchor && c + reach < w {
                    let (r0, c0) = (r - anchor, c - anchor);
                    for i in 0..n {
                        let start = (r0 + i) * w + c0;
                        let src = &plane.values[start..start + n];
                        for (k, s) in coeffs[i * n..(i + 1) * n].iter().zip(src) {
                            acc += k * s;
                        }
                    }
                } else {
                    for i in 0..n {
                        if let Some(sr) = row_map[r * n + i] {
                            let src = &plane.values[sr * w..(sr + 1) * w];
                            for j in 0..n {
                                if let Some(sc) = col_map[c * n + j] {
                                    acc += coeffs[i * n + j] * src[sc];
                                }
                            }
                        }
                    }
                }
                *out = acc;
            }
        });
    Ok(RealPlane {
        width: w,
        height: h,
        values,
    })
}

fn index_map(border: BorderPolicy, len: usize, n: usize, anchor: isize) -> Vec<Option<usize>> {
    let mut map = Vec::with_capacity(len * n);
    for pos in 0..len as isize {
        for k in 0..n as isize {
            map.push(border.resolve(pos + k - anchor, len));
        }
    }
    map
}

/// Two-pass convolution with a rank-1 kernel factored as
/// `k(i, j) = row_factor[i] * col_factor[j]`; the column pass runs after
/// the row pass. Agrees with [`convolve`] on the outer-product kernel up to
/// floating-point reassociation.
pub fn convolve_separable(
    plane: &RealPlane,
    row_factor: &[f64],
    col_factor: &[f64],
    border: BorderPolicy,
) -> Result<RealPlane> {
    if row_factor.len() != col_factor.len() || row_factor.is_empty() {
        return Err(Error::InvalidKernel(format!(
            "separable factors must be nonempty and equal-length, got {} and {}",
            row_factor.len(),
            col_factor.len()
        )));
    }
    let n = row_factor.len();
    check_kernel_fits(n, plane.width, plane.height)?;
    let (w, h) = (plane.width, plane.height);
    let anchor = (n - 1) / 2;
    let reach = n - 1 - anchor;

    let col_map = index_map(border, w, n, anchor as isize);
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(r, out_row)| {
        let src = &plane.values[r * w..(r + 1) * w];
        for (c, out) in out_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            if c >= anchor && c + reach < w {
                for (f, s) in col_factor.iter().zip(&src[c - anchor..c - anchor + n]) {
                    acc += f * s;
                }
            } else {
                for (j, &f) in col_factor.iter().enumerate() {
                    if let Some(sc) = col_map[c * n + j] {
                        acc += f * src[sc];
                    }
                }
            }
            *out = acc;
        }
    });

    let row_map = index_map(border, h, n, anchor as isize);
    let mut values = vec![0.0; w * h];
    values
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(r, out_row)| {
            let row_interior = r >= anchor && r + reach < h;
            for (c, out) in out_row.iter_mut().enumerate() {
                let mut acc = 0.0;
                if row_interior {
                    for (i, &f) in row_factor.iter().enumerate() {
                        acc += f * tmp[(r - anchor + i) * w + c];
                    }
                } else {
                    for (i, &f) in row_factor.iter().enumerate() {
                        if let Some(sr) = row_map[r * n + i] {
                            acc += f * tmp[sr * w + c];
                        }
                    }
                }
                *out = acc;
            }
        });
    Ok(RealPlane {
        width: w,
        height: h,
        values,
    })
}

/// Convolve with a gradient mask pair and assemble magnitude and direction.
pub fn gradient_field(
    image: &GrayImage,
    mx: &Kernel,
    my: &Kernel,
    border: BorderPolicy,
    norm: GradientNorm,
) -> Result<GradientField> {
    if mx.size() != my.size() {
        return Err(Error::InvalidKernel(format!(
            "gradient masks must share a size, got {} and {}",
            mx.size(),
            my.size()
        )));
    }
    let plane = image.to_real();
    let gx = convolve(&plane, mx, border)?;
    let gy = convolve(&plane, my, border)?;
    let magnitude = RealPlane {
        width: gx.width,
        height: gx.height,
        values: gx
            .values
            .iter()
            .zip(&gy.values)
            .map(|(&x, &y)| magnitude_of(x, y, norm))
            .collect(),
    };
    let direction = RealPlane {
        width: gx.width,
        height: gx.height,
        values: gx
            .values
            .iter()
            .zip(&gy.values)
            .map(|(&x, &y)| direction_of(x, y))
            .collect(),
    };
    Ok(GradientField {
        gx,
        gy,
        magnitude,
        direction,
    })
}

/// Resolve the threshold value a rule denotes on a given magnitude plane.
pub fn resolve_threshold(magnitude: &RealPlane, rule: ThresholdRule) -> Result<f64> {
    rule.validate()?;
    match rule {
        ThresholdRule::Absolute(t) => Ok(t),
        ThresholdRule::Percentile(p) => {
            let mut sorted = magnitude.values.clone();
            sorted.sort_unstable_by(f64::total_cmp);
            let n = sorted.len();
            let rank = ((p / 100.0 * n as f64).ceil() as usize).clamp(1, n);
            Ok(sorted[rank - 1])
        }
    }
}

/// Mark pixels whose magnitude is strictly greater than the resolved `T`.
pub fn threshold(magnitude: &RealPlane, rule: ThresholdRule) -> Result<EdgeMap> {
    let t = resolve_threshold(magnitude, rule)?;
    Ok(EdgeMap {
        width: magnitude.width,
        height: magnitude.height,
        edges: magnitude.values.iter().map(|&m| m > t).collect(),
    })
}

/// Convolve with a normalized smoothing kernel, round half away from zero,
/// and clamp back to 0-255.
pub fn smooth(image: &GrayImage, kernel: &Kernel, border: BorderPolicy) -> Result<GrayImage> {
    if kernel.kind() != MaskKind::Smoothing || !kernel.is_normalized() {
        return Err(Error::KindMismatch {
            expected: "normalized smoothing",
            actual: if kernel.kind() == MaskKind::Smoothing {
                "raw smoothing"
            } else {
                kernel.kind().as_str()
            },
        });
    }
    let out = convolve(&image.to_real(), kernel, border)?;
    Ok(GrayImage {
        width: out.width,
        height: out.height,
        intensities: out
            .values
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect(),
    })
}

/// Affine rescale of a nonnegative plane onto 0-255 with max -> 255; an
/// all-zero (or nonpositive) plane maps to all-zero.
pub fn magnitude_to_gray(plane: &RealPlane) -> GrayImage {
    let max = plane.values.iter().cloned().fold(0.0f64, f64::max);
    let intensities = if max > 0.0 {
        plane
            .values
            .iter()
            .map(|&v| (v.max(0.0) / max * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    } else {
        vec![0; plane.values.len()]
    };
    GrayImage {
        width: plane.width,
        height: plane.height,
        intensities,
    }
}

/// Selects the gradient mask pair the pipeline convolves with.
#[derive(Clone, Debug)]
pub enum Detector {
    Weibull {
        params: WeibullParams,
        grid: SamplingGrid,
    },
    Sobel,
    Prewitt,
    Roberts,
    Gaussian(GaussianSpec),
}

impl Detector {
    /// The `(mx, my)` pair this detector convolves with. Weibull and
    /// Gaussian pairs are normalized; Sobel, Prewitt, and Roberts use their
    /// classical raw coefficients.
    pub fn mask_pair(&self) -> Result<(Kernel, Kernel)> {
        match self {
            Detector::Weibull { params, grid } => weibull_gradient_pair(*params, grid),
            Detector::Sobel => Ok(sobel_masks()),
            Detector::Prewitt => Ok(prewitt_masks()),
            Detector::Roberts => Ok(roberts_masks()),
            Detector::Gaussian(spec) => Ok(gaussian_gradient_masks(*spec)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Detector::Weibull { .. } => "weibull",
            Detector::Sobel => "sobel",
            Detector::Prewitt => "prewitt",
            Detector::Roberts => "roberts",
            Detector::Gaussian(_) => "gaussian",
        }
    }
}

/// Options shared by every detector run.
#[derive(Clone, Debug)]
pub struct EdgeOptions {
    /// Optional smoothing pass before the gradient (a normalized smoothing
    /// kernel).
    pub pre_smooth: Option<Kernel>,
    pub border: BorderPolicy,
    pub norm: GradientNorm,
    pub rule: ThresholdRule,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        Self {
            pre_smooth: None,
            border: BorderPolicy::Replicate,
            norm: GradientNorm::L2,
            rule: ThresholdRule::Percentile(90.0),
        }
    }
}

/// The full pipeline: optional smoothing, gradient field, threshold.
/// Returns the edge map together with the field for inspection.
pub fn detect_edges(
    image: &GrayImage,
    detector: &Detector,
    options: &EdgeOptions,
) -> Result<(EdgeMap, GradientField)> {
    let smoothed;
    let input = match &options.pre_smooth {
        Some(kernel) => {
            smoothed = smooth(image, kernel, options.border)?;
            &smoothed
        }
        None => image,
    };
    let (mx, my) = detector.mask_pair()?;
    let field = gradient_field(input, &mx, &my, options.border, options.norm)?;
    let edges = threshold(&field.magnitude, options.rule)?;
    Ok((edges, field))
}

/// Edge-map comparison record; serializes to a flat JSON object.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeMetrics {
    pub density_candidate: f64,
    pub density_reference: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_run_length_candidate: f64,
    pub mean_run_length_reference: f64,
}

/// Mean length of maximal horizontal runs of edge pixels, a thickness proxy
/// perpendicular to vertical edges. 0 when the map is empty.
fn mean_run_length(map: &EdgeMap) -> f64 {
    let mut runs = 0usize;
    let mut total = 0usize;
    for row in map.edges.chunks(map.width) {
        let mut len = 0usize;
        for &e in row {
            if e {
                len += 1;
            } else if len > 0 {
                runs += 1;
                total += len;
                len = 0;
            }
        }
        if len > 0 {
            runs += 1;
            total += len;
        }
    }
    if runs == 0 {
        0.0
    } else {
        total as f64 / runs as f64
    }
}

/// Precision/recall/F1 of a candidate edge map against a reference, plus
/// densities and run-length thickness proxies for both maps.
pub fn compare_edge_maps(candidate: &EdgeMap, reference: &EdgeMap) -> Result<EdgeMetrics> {
    if candidate.width != reference.width || candidate.height != reference.height {
        return Err(Error::DimensionMismatch {
            left_width: candidate.width,
            left_height: candidate.height,
            right_width: reference.width,
            right_height: reference.height,
        });
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&c, &r) in candidate.edges.iter().zip(&reference.edges) {
        match (c, r) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(EdgeMetrics {
        density_candidate: candidate.density(),
        density_reference: reference.density(),
        precision,
        recall,
        f1,
        mean_run_length_candidate: mean_run_length(candidate),
        mean_run_length_reference: mean_run_length(reference),
    })
}
