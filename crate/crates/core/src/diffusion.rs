//! Explicit Laplacian diffusion, the refinement stage run before edge
//! extraction.
//!
//! One step is `psi + delta * lap(psi)` clipped to `[0, 255]`; the time step
//! is folded into `delta`. For `0 < delta <= 0.25` every update is a convex
//! combination of a pixel and its four neighbors, so the step obeys a discrete
//! maximum principle and (with replicate borders) conserves total intensity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagecore::{convolve_with, GrayImage, Kernel};

/// Largest `delta` for which the explicit update stays a convex combination.
pub const STABLE_DELTA_MAX: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// Direct four-neighbor second difference.
    #[default]
    FourNeighbor,
    /// The same operator expressed as a 3x3 weight matrix through [`convolve_with`].
    Weighted,
}

impl Stencil {
    /// Weight matrix for the five-point Laplacian.
    pub fn weights() -> Kernel {
        Kernel::from_3x3([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub delta: f64,
    pub time_steps: usize,
    #[serde(default)]
    pub stencil: Stencil,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            time_steps: 10,
            stencil: Stencil::FourNeighbor,
        }
    }
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)
    }

    /// Above [`STABLE_DELTA_MAX`] the update can overshoot; allowed, but
    /// callers should warn.
    pub fn is_stable(&self) -> bool {
        self.delta <= STABLE_DELTA_MAX
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "diffusion delta must be a finite value > 0, got {delta}"
        )))
    }
}

pub fn laplacian(img: &GrayImage, stencil: Stencil) -> GrayImage {
    laplacian_with(img, stencil, Execution::default())
}

pub fn laplacian_with(img: &GrayImage, stencil: Stencil, exec: Execution) -> GrayImage {
    match stencil {
        Stencil::Weighted => convolve_with(img, &Stencil::weights(), exec),
        Stencil::FourNeighbor => {
            let mut out = img.like(0.0);
            exec.for_each_row(out.data_mut(), img.width(), |y, row| {
                five_point_row(img, y, |x, _, lap| row[x] = lap);
            });
            out
        }
    }
}

/// Walk row `y`, handing `(x, center, laplacian)` to `emit`.
#[inline]
fn five_point_row(img: &GrayImage, y: usize, mut emit: impl FnMut(usize, f64, f64)) {
    let (w, h) = img.dims();
    let cur = img.row(y);
    let up = img.row(y.saturating_sub(1));
    let down = img.row((y + 1).min(h - 1));
    for x in 0..w {
        let c = cur[x];
        let left = cur[x.saturating_sub(1)];
        let right = cur[(x + 1).min(w - 1)];
        let lap = left + right + up[x] + down[x] - 4.0 * c;
        emit(x, c, lap);
    }
}

pub fn diffuse_step(img: &GrayImage, delta: f64, stencil: Stencil) -> Result<GrayImage> {
    diffuse_step_with(img, delta, stencil, Execution::default())
}

pub fn diffuse_step_with(
    img: &GrayImage,
    delta: f64,
    stencil: Stencil,
    exec: Execution,
) -> Result<GrayImage> {
    check_delta(delta)?;
    let update = |c: f64, lap: f64| (c + delta * lap).clamp(0.0, 255.0);
    match stencil {
        Stencil::FourNeighbor => {
            let mut out = img.like(0.0);
            exec.for_each_row(out.data_mut(), img.width(), |y, row| {
                five_point_row(img, y, |x, c, lap| row[x] = update(c, lap));
            });
            Ok(out)
        }
        Stencil::Weighted => {
            let lap = laplacian_with(img, stencil, exec);
            img.zip_map(&lap, update)
        }
    }
}

pub fn evolve(img: &GrayImage, cfg: &DiffusionConfig) -> Result<GrayImage> {
    evolve_with(img, cfg, Execution::default())
}

/// `cfg.time_steps` sequential applications of [`diffuse_step_with`].
pub fn evolve_with(img: &GrayImage, cfg: &DiffusionConfig, exec: Execution) -> Result<GrayImage> {
    cfg.validate()?;
    let mut psi = img.clone();
    for _ in 0..cfg.time_steps {
        psi = diffuse_step_with(&psi, cfg.delta, cfg.stencil, exec)?;
    }
    Ok(psi)
}
