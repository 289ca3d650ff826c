//! Edge detection with convolution masks built from the 2D Weibull
//! distribution.
//!
//! The Weibull density generalizes the Gaussian's role in gradient mask
//! design: sampling its first partial derivatives on a small grid yields an
//! `(Mx, My)` pair that, unlike the Gaussian's, can be skewed. This crate
//! provides:
//!
//! * [`weibull`]: the density and its first partial derivatives;
//! * [`mask`]: grid sampling and the smoothing / two-sided gradient
//!   normalizations;
//! * [`classic`]: Sobel, Prewitt, Roberts, and gradient-of-Gaussian
//!   comparison operators;
//! * [`pipeline`]: convolution with border policies, gradient magnitude and
//!   direction, thresholding, and edge-map comparison metrics;
//! * [`io`]: PGM images, the kernel text format, and metrics JSON.
//!
//! ```
//! use wedge_core::{
//!     detect_edges, Detector, EdgeOptions, GrayImage, SamplingGrid, WeibullParams,
//!     DEFAULT_GRID_CENTER, DEFAULT_GRID_SPACING,
//! };
//!
//! # fn main() -> wedge_core::Result<()> {
//! // vertical step: dark left half, bright right half
//! let mut data = vec![0u8; 32 * 32];
//! for row in data.chunks_mut(32) {
//!     row[16..].fill(255);
//! }
//! let image = GrayImage::new(32, 32, data)?;
//!
//! let detector = Detector::Weibull {
//!     params: WeibullParams::new(1.0, 2.0)?,
//!     grid: SamplingGrid::new(
//!         1,
//!         DEFAULT_GRID_SPACING,
//!         (DEFAULT_GRID_CENTER, DEFAULT_GRID_CENTER),
//!     )?,
//! };
//! let (edges, field) = detect_edges(&image, &detector, &EdgeOptions::default())?;
//! assert!(edges.edge_count() > 0);
//! assert_eq!(field.magnitude.width(), 32);
//! # Ok(())
//! # }
//! ```

#![forbid(unsafe_code)]

pub mod classic;
pub mod error;
pub mod io;
pub mod mask;
pub mod pipeline;
pub mod weibull;

pub use classic::{gaussian_gradient_masks, prewitt_masks, roberts_masks, sobel_masks, GaussianSpec};
pub use error::{Error, Result};
pub use mask::{
    normalize_gradient, normalize_smoothing, sample_mask, weibull_gradient_pair,
    weibull_smoothing_mask, Kernel, MaskKind, SamplingGrid,
};
pub use pipeline::{
    compare_edge_maps, convolve, convolve_separable, detect_edges, gradient_field,
    magnitude_to_gray, resolve_threshold, smooth, threshold, BorderPolicy, Detector, EdgeMap,
    EdgeMetrics, EdgeOptions, GradientField, GradientNorm, GrayImage, RealPlane, ThresholdRule,
};
pub use weibull::{grad_x_2d, grad_y_2d, pdf_1d, pdf_2d, pdf_mode, WeibullParams};

/// Grid center reproducing the published 3x3 masks: `2^(-1/2)` on both axes.
pub const DEFAULT_GRID_CENTER: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Grid spacing reproducing the published 3x3 masks.
pub const DEFAULT_GRID_SPACING: f64 = 0.5;
