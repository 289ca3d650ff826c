//! The classical comparison operators: Sobel, Prewitt, Roberts, and a
//! gradient-of-Gaussian pair normalized with the same two-sided rule as the
//! Weibull masks, so the detectors differ only in the generating function.

use crate::error::{Error, Result};
use crate::mask::{normalize_gradient, Kernel, MaskKind};

/// Parameters of the gradient-of-Gaussian masks: standard deviation of the
/// smoothing Gaussian and the half-size of the sampled grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSpec {
    sigma: f64,
    half_width: usize,
}

impl GaussianSpec {
    pub fn new(sigma: f64, half_width: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if half_width < 1 {
            return Err(Error::InvalidKernel(
                "gaussian half_width must be at least 1".into(),
            ));
        }
        Ok(Self { sigma, half_width })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }
}

impl Default for GaussianSpec {
    /// sigma = 1, 3x3, matching the default Weibull mask size.
    fn default() -> Self {
        Self {
            sigma: 1.0,
            half_width: 1,
        }
    }
}

fn kernel3(kind: MaskKind, rows: [[f64; 3]; 3]) -> Kernel {
    Kernel::new(3, rows.into_iter().flatten().collect(), kind).expect("static 3x3 kernel")
}

/// The Sobel pair `(Sx, Sy)`, `Sy = transpose(Sx)`.
pub fn sobel_masks() -> (Kernel, Kernel) {
    let sx = kernel3(
        MaskKind::GradientX,
        [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]],
    );
    let sy = sx.transposed();
    (sx, sy)
}

/// The Prewitt pair, unit weights.
pub fn prewitt_masks() -> (Kernel, Kernel) {
    let px = kernel3(
        MaskKind::GradientX,
        [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]],
    );
    let py = px.transposed();
    (px, py)
}

/// The Roberts 2x2 cross-difference pair. Even-sized kernels anchor at the
/// top-left of the window during convolution.
pub fn roberts_masks() -> (Kernel, Kernel) {
    let r1 = Kernel::new(2, vec![1.0, 0.0, 0.0, -1.0], MaskKind::GradientX)
        .expect("static 2x2 kernel");
    let r2 = Kernel::new(2, vec![0.0, 1.0, -1.0, 0.0], MaskKind::GradientY)
        .expect("static 2x2 kernel");
    (r1, r2)
}

/// First-derivative-of-Gaussian masks sampled at integer offsets and passed
/// through the two-sided gradient normalization.
///
/// Raw coefficient at offsets `(i, j)`, derivative along the row axis:
/// `Gx(i, j) = -i/sigma^2 * exp(-(i^2 + j^2) / (2 sigma^2))`, `Gy = Gx^T`.
pub fn gaussian_gradient_masks(spec: GaussianSpec) -> (Kernel, Kernel) {
    let gx_raw = gaussian_gradient_raw(spec);
    let gx = normalize_gradient(&gx_raw).expect("gaussian gradient has both signs");
    let gy = normalize_gradient(&gx_raw.transposed()).expect("gaussian gradient has both signs");
    (gx, gy)
}

/// The raw (unnormalized) gradient-x Gaussian mask.
pub fn gaussian_gradient_raw(spec: GaussianSpec) -> Kernel {
    let h = spec.half_width as isize;
    let n = 2 * spec.half_width + 1;
    let s2 = spec.sigma * spec.sigma;
    let mut coefficients = Vec::with_capacity(n * n);
    for i in -h..=h {
        for j in -h..=h {
            let (fi, fj) = (i as f64, j as f64);
            coefficients.push(-fi / s2 * (-(fi * fi + fj * fj) / (2.0 * s2)).exp());
        }
    }
    Kernel::new(n, coefficients, MaskKind::GradientX).expect("finite gaussian samples")
}
