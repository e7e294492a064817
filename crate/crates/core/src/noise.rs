//! Seeded additive Gaussian noise.
//!
//! The generator is fixed: ChaCha8 seeded through `seed_from_u64`, with
//! 53-bit uniforms fed to the Box-Muller transform (both outputs of each pair
//! are used, cosine first). Changing any of this changes every noisy image, so
//! it is pinned by a golden-value test.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sigma >= 0.0 && self.sigma.is_finite() {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "noise sigma must be a finite value >= 0, got {}",
                self.sigma
            )))
        }
    }
}

/// Standard normal stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`, so the logarithm below never sees zero.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let radius = (-2.0 * self.open_unit().ln()).sqrt();
        let angle = TAU * self.open_unit();
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

pub fn add_gaussian_noise(img: &GrayImage, spec: &NoiseSpec) -> Result<GrayImage> {
    spec.validate()?;
    if spec.sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut stream = GaussianStream::new(spec.seed);
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = (*v + spec.sigma * stream.next_standard()).clamp(0.0, 255.0);
    }
    Ok(out)
}
