//! Gaussian smoothing, Sobel gradients and the two single-operator edge maps.

use serde::{Deserialize, Serialize};

use crate::diffusion::{laplacian_with, Stencil};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagecore::{convolve_with, GrayImage, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub sigma: f64,
    pub radius: usize,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            radius: 1,
        }
    }
}

impl GaussianSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::arg(format!(
                "gaussian sigma must be a finite value > 0, got {}",
                self.sigma
            )));
        }
        if self.radius < 1 {
            return Err(Error::arg("gaussian radius must be at least 1"));
        }
        Ok(())
    }
}

/// Gradient planes from the Sobel pair. `direction` is `atan2(gy, gx)` in
/// image coordinates (y grows downward), `0` where both components vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub gx: GrayImage,
    pub gy: GrayImage,
    pub magnitude: GrayImage,
    pub direction: GrayImage,
}

impl GradientField {
    /// Assemble a field from component planes, deriving magnitude and direction.
    pub fn from_components(gx: GrayImage, gy: GrayImage) -> Result<Self> {
        let magnitude = gx.zip_map(&gy, f64::hypot)?;
        let direction = gx.zip_map(&gy, |x, y| {
            if x == 0.0 && y == 0.0 {
                0.0
            } else {
                y.atan2(x)
            }
        })?;
        Ok(Self {
            gx,
            gy,
            magnitude,
            direction,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.magnitude.dims()
    }
}

pub fn sobel_x() -> Kernel {
    Kernel::from_3x3([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
}

pub fn sobel_y() -> Kernel {
    Kernel::from_3x3([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])
}

/// Sampled Gaussian renormalized by its discrete sum, so constant images pass
/// through unchanged.
pub fn gaussian_kernel(spec: &GaussianSpec) -> Result<Kernel> {
    spec.validate()?;
    let k = spec.radius as isize;
    let two_var = 2.0 * spec.sigma * spec.sigma;
    let mut weights = Vec::with_capacity(((2 * k + 1) * (2 * k + 1)) as usize);
    for dy in -k..=k {
        for dx in -k..=k {
            weights.push((-((dx * dx + dy * dy) as f64) / two_var).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Kernel::new(spec.radius, weights)
}

pub fn gaussian_blur(img: &GrayImage, spec: &GaussianSpec) -> Result<GrayImage> {
    gaussian_blur_with(img, spec, Execution::default())
}

pub fn gaussian_blur_with(
    img: &GrayImage,
    spec: &GaussianSpec,
    exec: Execution,
) -> Result<GrayImage> {
    Ok(convolve_with(img, &gaussian_kernel(spec)?, exec))
}

pub fn sobel_gradients(img: &GrayImage) -> GradientField {
    sobel_gradients_with(img, Execution::default())
}

pub fn sobel_gradients_with(img: &GrayImage, exec: Execution) -> GradientField {
    let gx = convolve_with(img, &sobel_x(), exec);
    let gy = convolve_with(img, &sobel_y(), exec);
    GradientField::from_components(gx, gy).expect("planes share input dimensions")
}

/// Sobel magnitude rescaled so its maximum becomes 255.
pub fn sobel_edge_map(img: &GrayImage) -> GrayImage {
    sobel_edge_map_with(img, Execution::default())
}

pub fn sobel_edge_map_with(img: &GrayImage, exec: Execution) -> GrayImage {
    let field = sobel_gradients_with(img, exec);
    let (_, peak) = field.magnitude.min_max();
    if peak > 0.0 {
        field.magnitude.map(|m| m / peak * 255.0)
    } else {
        field.magnitude.like(0.0)
    }
}

/// Five-point Laplacian of the blurred image with negative responses clamped
/// to zero.
pub fn laplacian_edge_map(blurred: &GrayImage) -> GrayImage {
    laplacian_edge_map_with(blurred, Execution::default())
}

pub fn laplacian_edge_map_with(blurred: &GrayImage, exec: Execution) -> GrayImage {
    laplacian_with(blurred, Stencil::FourNeighbor, exec).map(|v| v.clamp(0.0, 255.0))
}
