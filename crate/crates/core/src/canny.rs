//! Non-maximum suppression and double-threshold hysteresis.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::edgefilters::{gaussian_blur_with, sobel_gradients_with, GaussianSpec, GradientField};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagecore::GrayImage;

/// Strong pixels are `> high`, weak ones fall in `(low, high]`, the rest are
/// discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for CannyThresholds {
    fn default() -> Self {
        Self {
            low: 50.0,
            high: 150.0,
        }
    }
}

impl CannyThresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        let th = Self { low, high };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        if self.low >= 0.0 && self.low < self.high && self.high.is_finite() {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "thresholds must satisfy 0 <= low < high, got low={} high={}",
                self.low, self.high
            )))
        }
    }
}

/// Gradient axis after folding the direction modulo pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Axis {
    /// Nearest of the four axes; bins are half-open `[c - 22.5, c + 22.5)`.
    pub fn quantize(theta: f64) -> Self {
        let deg = theta.rem_euclid(PI).to_degrees();
        match deg {
            d if d < 22.5 => Axis::Deg0,
            d if d < 67.5 => Axis::Deg45,
            d if d < 112.5 => Axis::Deg90,
            d if d < 157.5 => Axis::Deg135,
            _ => Axis::Deg0,
        }
    }

    /// Unit step `(dx, dy)` along the axis in image coordinates (y down).
    pub fn step(self) -> (isize, isize) {
        match self {
            Axis::Deg0 => (1, 0),
            Axis::Deg45 => (1, 1),
            Axis::Deg90 => (0, 1),
            Axis::Deg135 => (-1, 1),
        }
    }
}

/// Keep a magnitude only where it is a local maximum along its quantized
/// gradient axis; the two axis neighbors are read with replicate padding.
///
/// Comparison is `>=` on both sides, so plateaus survive; an exactly
/// symmetric two-pixel ridge keeps both pixels.
pub fn non_max_suppression(field: &GradientField) -> GrayImage {
    non_max_suppression_with(field, Execution::default())
}

pub fn non_max_suppression_with(field: &GradientField, exec: Execution) -> GrayImage {
    let mag = &field.magnitude;
    let mut out = mag.like(0.0);
    exec.for_each_row(out.data_mut(), mag.width(), |y, row| {
        for (x, slot) in row.iter_mut().enumerate() {
            let m = mag.get(x, y);
            if m <= 0.0 {
                continue;
            }
            let (dx, dy) = Axis::quantize(field.direction.get(x, y)).step();
            let (xi, yi) = (x as isize, y as isize);
            let fwd = mag.get_clamped(xi + dx, yi + dy);
            let back = mag.get_clamped(xi - dx, yi - dy);
            if m >= fwd && m >= back {
                *slot = m;
            }
        }
    });
    out
}

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Binary `{0, 255}` map: strong pixels plus every weak pixel 8-connected to
/// one through other weak or strong pixels.
pub fn hysteresis(nms: &GrayImage, th: &CannyThresholds) -> GrayImage {
    let (w, h) = nms.dims();
    let data = nms.data();
    let mut keep = vec![false; w * h];
    let mut queue = VecDeque::new();

    for (i, &v) in data.iter().enumerate() {
        if v > th.high {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for (dx, dy) in NEIGHBORS_8 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let j = ny as usize * w + nx as usize;
            if !keep[j] && data[j] > th.low {
                keep[j] = true;
                queue.push_back(j);
            }
        }
    }

    let mut out = nms.like(0.0);
    for (o, k) in out.data_mut().iter_mut().zip(keep) {
        if k {
            *o = 255.0;
        }
    }
    out
}

/// Hysteresis over suppressed Sobel gradients of an already blurred image.
pub fn canny_on_blurred(
    blurred: &GrayImage,
    th: &CannyThresholds,
    exec: Execution,
) -> Result<GrayImage> {
    th.validate()?;
    let field = sobel_gradients_with(blurred, exec);
    Ok(hysteresis(&non_max_suppression_with(&field, exec), th))
}

pub fn canny(img: &GrayImage, blur: &GaussianSpec, th: &CannyThresholds) -> Result<GrayImage> {
    canny_with(img, blur, th, Execution::default())
}

pub fn canny_with(
    img: &GrayImage,
    blur: &GaussianSpec,
    th: &CannyThresholds,
    exec: Execution,
) -> Result<GrayImage> {
    let blurred = gaussian_blur_with(img, blur, exec)?;
    canny_on_blurred(&blurred, th, exec)
}
