//! Convolution mask construction by sampling the Weibull functions on a
//! square grid, plus the two normalization rules:
//!
//! * smoothing masks are divided by their total so they sum to 1;
//! * gradient masks are normalized two-sided, positive entries to a sum of
//!   +1 and negative entries to a sum of -1, so any constant input yields a
//!   zero response.
//!
//! Mask orientation: the row index varies the x argument and the column
//! index varies the y argument, top row = `center_x - half_width * spacing`.

use crate::error::{Error, Result};
use crate::weibull::{grad_x_2d, grad_y_2d, pdf_2d, WeibullParams};

/// What a kernel computes when convolved with an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskKind {
    Smoothing,
    GradientX,
    GradientY,
}

impl MaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaskKind::Smoothing => "smoothing",
            MaskKind::GradientX => "gradient-x",
            MaskKind::GradientY => "gradient-y",
        }
    }

    pub fn is_gradient(&self) -> bool {
        matches!(self, MaskKind::GradientX | MaskKind::GradientY)
    }
}

impl std::fmt::Display for MaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoothing" => Ok(MaskKind::Smoothing),
            "gradient-x" => Ok(MaskKind::GradientX),
            "gradient-y" => Ok(MaskKind::GradientY),
            other => Err(Error::InvalidKernel(format!("unknown mask kind {other:?}"))),
        }
    }
}

/// Where the 2D functions are evaluated to form a mask: an odd square grid
/// of `2*half_width + 1` points per axis, centered on `(center_x, center_y)`
/// with per-axis spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingGrid {
    center_x: f64,
    center_y: f64,
    spacing_x: f64,
    spacing_y: f64,
    half_width: usize,
}

impl SamplingGrid {
    /// Grid with a single spacing shared by both axes.
    pub fn new(half_width: usize, spacing: f64, center: (f64, f64)) -> Result<Self> {
        Self::with_spacings(half_width, spacing, spacing, center)
    }

    /// Grid with distinct x and y increments.
    pub fn with_spacings(
        half_width: usize,
        spacing_x: f64,
        spacing_y: f64,
        center: (f64, f64),
    ) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::InvalidGrid("half_width must be at least 1".into()));
        }
        for (name, v) in [("spacing_x", spacing_x), ("spacing_y", spacing_y)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let (cx, cy) = center;
        if !cx.is_finite() || cx <= 0.0 || !cy.is_finite() || cy <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "center components must be positive and finite, got ({cx}, {cy})"
            )));
        }
        Ok(Self {
            center_x: cx,
            center_y: cy,
            spacing_x,
            spacing_y,
            half_width,
        })
    }

    pub fn center_x(&self) -> f64 {
        self.center_x
    }

    pub fn center_y(&self) -> f64 {
        self.center_y
    }

    pub fn spacing_x(&self) -> f64 {
        self.spacing_x
    }

    pub fn spacing_y(&self) -> f64 {
        self.spacing_y
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Mask side length, `2*half_width + 1`.
    pub fn size(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Axis coordinates `center - h*d, ..., center, ..., center + h*d`.
    pub fn x_coords(&self) -> Vec<f64> {
        self.axis(self.center_x, self.spacing_x)
    }

    pub fn y_coords(&self) -> Vec<f64> {
        self.axis(self.center_y, self.spacing_y)
    }

    fn axis(&self, center: f64, spacing: f64) -> Vec<f64> {
        let h = self.half_width as isize;
        (-h..=h).map(|k| center + k as f64 * spacing).collect()
    }

    /// True when the grid extends into the nonpositive region, where every
    /// sample is 0 by the density's domain. Callers typically surface this
    /// as a warning.
    pub fn has_nonpositive_coords(&self) -> bool {
        let h = self.half_width as f64;
        self.center_x - h * self.spacing_x <= 0.0 || self.center_y - h * self.spacing_y <= 0.0
    }
}

/// A square matrix of convolution coefficients, row-major.
///
/// Masks sampled from the Weibull grid are odd-sized; the type also admits
/// the 2x2 Roberts pair (anchored top-left during convolution) and the 1x1
/// identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    size: usize,
    coefficients: Vec<f64>,
    kind: MaskKind,
    normalized: bool,
}

impl Kernel {
    /// A raw (unnormalized) kernel from row-major coefficients.
    pub fn new(size: usize, coefficients: Vec<f64>, kind: MaskKind) -> Result<Self> {
        Self::from_parts(size, coefficients, kind, false)
    }

    pub fn from_parts(
        size: usize,
        coefficients: Vec<f64>,
        kind: MaskKind,
        normalized: bool,
    ) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidKernel("size must be at least 1".into()));
        }
        if coefficients.len() != size * size {
            return Err(Error::InvalidKernel(format!(
                "expected {} coefficients for size {size}, got {}",
                size * size,
                coefficients.len()
            )));
        }
        if let Some(bad) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "coefficients must be finite, got {bad}"
            )));
        }
        Ok(Self {
            size,
            coefficients,
            kind,
            normalized,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.coefficients[row * self.size + col]
    }

    /// Anchor offset used by convolution: `(size - 1) / 2`. Even sizes
    /// (Roberts) anchor at the top-left.
    pub fn half_width(&self) -> usize {
        (self.size - 1) / 2
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Coefficient transpose. Gradient kinds swap (a gradient-x mask
    /// transposes into a gradient-y mask); smoothing stays smoothing.
    pub fn transposed(&self) -> Kernel {
        let n = self.size;
        let mut t = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                t[c * n + r] = self.coefficients[r * n + c];
            }
        }
        let kind = match self.kind {
            MaskKind::GradientX => MaskKind::GradientY,
            MaskKind::GradientY => MaskKind::GradientX,
            MaskKind::Smoothing => MaskKind::Smoothing,
        };
        Kernel {
            size: n,
            coefficients: t,
            kind,
            normalized: self.normalized,
        }
    }

    /// Rank-1 factorization `k(i, j) = u[i] * v[j]`, if one exists within a
    /// small relative tolerance. All masks sampled from the separable
    /// Weibull forms factor this way, which enables two-pass convolution.
    pub fn rank1_factors(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.size;
        let (mut pr, mut pc, mut pmax) = (0, 0, 0.0f64);
        for r in 0..n {
            for c in 0..n {
                let a = self.get(r, c).abs();
                if a > pmax {
                    (pr, pc, pmax) = (r, c, a);
                }
            }
        }
        if pmax == 0.0 {
            return None;
        }
        let pivot = self.get(pr, pc);
        let v: Vec<f64> = (0..n).map(|c| self.get(pr, c)).collect();
        let u: Vec<f64> = (0..n).map(|r| self.get(r, pc) / pivot).collect();
        let tol = 1e-9 * pmax;
        for (r, uc) in u.iter().enumerate() {
            for (c, vc) in v.iter().enumerate() {
                if (self.get(r, c) - uc * vc).abs() > tol {
                    return None;
                }
            }
        }
        Some((u, v))
    }
}

/// Sample one of the 2D Weibull functions on the grid, producing a raw mask.
///
/// The coefficient at `(row i, col j)` is the function at `(x_i, y_j)`.
pub fn sample_mask(kind: MaskKind, params: WeibullParams, grid: &SamplingGrid) -> Kernel {
    let f: fn(f64, f64, WeibullParams) -> f64 = match kind {
        MaskKind::Smoothing => pdf_2d,
        MaskKind::GradientX => grad_x_2d,
        MaskKind::GradientY => grad_y_2d,
    };
    let xs = grid.x_coords();
    let ys = grid.y_coords();
    let n = grid.size();
    let mut coefficients = Vec::with_capacity(n * n);
    for &x in &xs {
        for &y in &ys {
            coefficients.push(f(x, y, params));
        }
    }
    Kernel {
        size: n,
        coefficients,
        kind,
        normalized: false,
    }
}

/// Divide a smoothing mask by its total so the coefficients sum to 1.
pub fn normalize_smoothing(raw: &Kernel) -> Result<Kernel> {
    if raw.kind != MaskKind::Smoothing {
        return Err(Error::KindMismatch {
            expected: "smoothing",
            actual: raw.kind.as_str(),
        });
    }
    if raw.coefficients.iter().any(|&c| c < 0.0) {
        return Err(Error::DegenerateMask(
            "smoothing mask has negative coefficients".into(),
        ));
    }
    let total = raw.sum();
    if total <= 0.0 {
        return Err(Error::DegenerateMask(
            "smoothing mask sums to zero (grid entirely in the nonpositive region?)".into(),
        ));
    }
    Ok(Kernel {
        size: raw.size,
        coefficients: raw.coefficients.iter().map(|c| c / total).collect(),
        kind: raw.kind,
        normalized: true,
    })
}

/// Two-sided normalization of a gradient mask: positive coefficients are
/// divided by their sum, negative ones by the absolute value of theirs,
/// zeros stay. The result responds with exactly 0 to constant inputs.
pub fn normalize_gradient(raw: &Kernel) -> Result<Kernel> {
    if !raw.kind.is_gradient() {
        return Err(Error::KindMismatch {
            expected: "gradient-x or gradient-y",
            actual: raw.kind.as_str(),
        });
    }
    let pos: f64 = raw.coefficients.iter().filter(|&&c| c > 0.0).sum();
    let neg: f64 = raw.coefficients.iter().filter(|&&c| c < 0.0).sum();
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::DegenerateMask(format!(
            "gradient mask needs both signs to act as a differentiator \
             (positive sum {pos}, negative sum {neg})"
        )));
    }
    let coefficients = raw
        .coefficients
        .iter()
        .map(|&c| {
            if c > 0.0 {
                c / pos
            } else if c < 0.0 {
                c / -neg
            } else {
                0.0
            }
        })
        .collect();
    Ok(Kernel {
        size: raw.size,
        coefficients,
        kind: raw.kind,
        normalized: true,
    })
}

/// The normalized `(Mx, My)` gradient pair for the given parameters and grid.
pub fn weibull_gradient_pair(params: WeibullParams, grid: &SamplingGrid) -> Result<(Kernel, Kernel)> {
    let mx = normalize_gradient(&sample_mask(MaskKind::GradientX, params, grid))?;
    let my = normalize_gradient(&sample_mask(MaskKind::GradientY, params, grid))?;
    Ok((mx, my))
}

/// A normalized Weibull smoothing mask for the given parameters and grid.
pub fn weibull_smoothing_mask(params: WeibullParams, grid: &SamplingGrid) -> Result<Kernel> {
    normalize_smoothing(&sample_mask(MaskKind::Smoothing, params, grid))
}
