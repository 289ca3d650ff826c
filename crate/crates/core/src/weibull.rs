//! The Weibull density and its first partial derivatives.
//!
//! Everything here is a pure function of `(alpha, beta)` and the evaluation
//! point. The 2D forms are separable products of the 1D forms:
//!
//! ```text
//! pdf_1d(x)      = alpha*beta * x^(beta-1) * exp(-alpha * x^beta)          for x > 0
//! pdf_2d(x, y)   = pdf_1d(x) * pdf_1d(y)
//! grad_x_2d(x,y) = pdf_1d'(x) * pdf_1d(y)
//!                = alpha^2*beta^2 * x^(beta-2) * y^(beta-1)
//!                  * exp(-alpha*(x^beta + y^beta)) * (beta - 1 - alpha*beta*x^beta)
//! ```
//!
//! All functions return exactly 0 on the closed nonpositive region of their
//! arguments, which keeps mask sampling total even when a grid extends past
//! the origin.

use crate::error::{Error, Result};

/// The `(alpha, beta)` pair parameterizing the Weibull family.
///
/// `alpha` is the rate-like scale parameter, `beta` the shape parameter.
/// Both must be positive and finite; construction rejects anything else.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeibullParams {
    alpha: f64,
    beta: f64,
}

impl WeibullParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// 1D Weibull density: `alpha*beta * x^(beta-1) * exp(-alpha*x^beta)` for
/// `x > 0`, and 0 elsewhere (the boundary `x = 0` takes the zero branch).
pub fn pdf_1d(x: f64, params: WeibullParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (a, b) = (params.alpha, params.beta);
    a * b * x.powf(b - 1.0) * (-a * x.powf(b)).exp()
}

/// Derivative of [`pdf_1d`] in `x`, zero on `x <= 0`.
///
/// The sign follows the bracket `(beta - 1 - alpha*beta*x^beta)`, which
/// vanishes at the mode.
pub fn pdf_1d_deriv(x: f64, params: WeibullParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (a, b) = (params.alpha, params.beta);
    a * b * x.powf(b - 2.0) * (-a * x.powf(b)).exp() * (b - 1.0 - a * b * x.powf(b))
}

/// 2D Weibull density, the product `pdf_1d(x) * pdf_1d(y)`.
pub fn pdf_2d(x: f64, y: f64, params: WeibullParams) -> f64 {
    pdf_1d(x, params) * pdf_1d(y, params)
}

/// Partial derivative of [`pdf_2d`] in `x`.
pub fn grad_x_2d(x: f64, y: f64, params: WeibullParams) -> f64 {
    pdf_1d_deriv(x, params) * pdf_1d(y, params)
}

/// Partial derivative of [`pdf_2d`] in `y`; the exact mirror
/// `grad_y_2d(x, y) = grad_x_2d(y, x)`.
pub fn grad_y_2d(x: f64, y: f64, params: WeibullParams) -> f64 {
    grad_x_2d(y, x, params)
}

/// Argmax of [`pdf_1d`] on `(0, inf)`: `((beta-1)/(alpha*beta))^(1/beta)`.
///
/// Only defined for `beta > 1`; below that the density is monotone
/// decreasing and has no interior mode.
pub fn pdf_mode(params: WeibullParams) -> Result<f64> {
    let (a, b) = (params.alpha, params.beta);
    if b <= 1.0 {
        return Err(Error::NoInteriorMode { beta: b });
    }
    Ok(((b - 1.0) / (a * b)).powf(1.0 / b))
}
