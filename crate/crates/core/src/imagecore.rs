//! Image value model and the single replicate-padded correlation engine every
//! stencil in the crate goes through.
//!
//! Intensities are `f64` throughout. Quantization to 8 bits only happens in
//! [`crate::io`] when a map is written out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

/// Luma weights applied to (R, G, B). They sum to 0.9999 and are not
/// renormalized.
pub const LUMA_WEIGHTS: [f64; 3] = [0.2989, 0.5870, 0.1140];

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 1 << 16;

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!(
            "image must be at least 1x1, got {width}x{height}"
        )));
    }
    if width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::Dimension(format!(
            "{width}x{height} exceeds the {MAX_DIMENSION} pixel limit"
        )));
    }
    Ok(())
}

/// Row-major scalar intensity field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![value; width * height],
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, 0.0)
    }

    /// Build from `f(x, y)`, with `x` the column and `y` the row.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Same dimensions as `self`, filled with `value`.
    pub fn like(&self, value: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: vec![value; self.data.len()],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Replicate-padded read: out-of-range coordinates clamp to the border.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn ensure_same_dims(&self, other: &GrayImage) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            });
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Self {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// `(min, max)` over all samples.
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Number of samples `>= level`.
    pub fn count_at_least(&self, level: f64) -> usize {
        self.data.iter().filter(|&&v| v >= level).count()
    }

    /// `255` where `value >= level`, else `0`.
    pub fn binarize(&self, level: f64) -> Self {
        self.map(|v| if v >= level { 255.0 } else { 0.0 })
    }
}

/// Row-major RGB triples, each channel in `[0, 255]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::Dimension(format!(
                "expected {} channel samples for {width}x{height} RGB, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::arg(format!(
                "RGB channel value {bad} outside [0, 255]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width * height * 3)
            .collect();
        Self::new(width, height, data)
    }

    /// Gray planes replicated into all three channels (clamped to `[0, 255]`).
    pub fn from_gray(gray: &GrayImage) -> Self {
        let data = gray
            .data()
            .iter()
            .flat_map(|&v| {
                let v = v.clamp(0.0, 255.0);
                [v, v, v]
            })
            .collect();
        Self {
            width: gray.width(),
            height: gray.height(),
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f64; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

/// Odd-sized square stencil, `(2k+1)^2` weights stored row-major with the row
/// index running over the vertical offset. A matrix written out by hand is
/// therefore laid over the image as printed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(radius: usize, weights: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(Error::arg(format!(
                "kernel of radius {radius} needs {} weights, got {}",
                side * side,
                weights.len()
            )));
        }
        Ok(Self { radius, weights })
    }

    pub fn from_3x3(rows: [[f64; 3]; 3]) -> Self {
        Self {
            radius: 1,
            weights: rows.iter().flatten().copied().collect(),
        }
    }

    /// Delta kernel: center 1, everything else 0.
    pub fn identity(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let mut weights = vec![0.0; side * side];
        weights[radius * side + radius] = 1.0;
        Self { radius, weights }
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at horizontal offset `dx` and vertical offset `dy`, both in `[-k, k]`.
    #[inline]
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let k = self.radius as isize;
        self.weights[((dy + k) * (2 * k + 1) + (dx + k)) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| wr * p[0] + wg * p[1] + wb * p[2])
        .collect();
    GrayImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

pub fn clip_intensity(img: &GrayImage, lo: f64, hi: f64) -> Result<GrayImage> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::arg(format!(
            "clip bounds inverted: lo={lo} > hi={hi}"
        )));
    }
    Ok(img.map(|v| v.clamp(lo, hi)))
}

/// Correlation (no kernel flip) with replicate padding. The output is not
/// range-clipped.
pub fn convolve(img: &GrayImage, kern: &Kernel) -> GrayImage {
    convolve_with(img, kern, Execution::default())
}

pub fn convolve_with(img: &GrayImage, kern: &Kernel, exec: Execution) -> GrayImage {
    let (w, h) = img.dims();
    let k = kern.radius();
    let side = kern.side();
    let weights = kern.weights();
    let mut out = vec![0.0; w * h];

    exec.for_each_row(&mut out, w, |y, out_row| {
        let rows: Vec<&[f64]> = (0..side)
            .map(|r| {
                let sy = (y as isize + r as isize - k as isize).clamp(0, h as isize - 1);
                img.row(sy as usize)
            })
            .collect();
        let interior = k..w.saturating_sub(k).max(k);
        for (x, slot) in out_row.iter_mut().enumerate() {
            let mut acc = 0.0;
            if interior.contains(&x) {
                let x0 = x - k;
                for (r, src) in rows.iter().enumerate() {
                    let wrow = &weights[r * side..(r + 1) * side];
                    let srow = &src[x0..x0 + side];
                    for (wv, sv) in wrow.iter().zip(srow) {
                        acc += wv * sv;
                    }
                }
            } else {
                for (r, src) in rows.iter().enumerate() {
                    for c in 0..side {
                        let sx = (x as isize + c as isize - k as isize).clamp(0, w as isize - 1);
                        acc += weights[r * side + c] * src[sx as usize];
                    }
                }
            }
            *slot = acc;
        }
    });

    GrayImage {
        width: w,
        height: h,
        data: out,
    }
}
