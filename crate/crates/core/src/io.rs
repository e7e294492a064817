//! PNG and binary PGM (P5) decode/encode.
//!
//! Decoding yields real-valued planes; encoding rounds half-up and clamps to
//! `[0, 255]`.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Error, Result};
use crate::imagecore::{to_grayscale, GrayImage, RgbImage};

/// A decoded input, keeping whether it carried color.
#[derive(Debug, Clone, PartialEq)]
pub enum InputImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl InputImage {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            InputImage::Gray(g) => g.dims(),
            InputImage::Rgb(c) => c.dims(),
        }
    }

    pub fn to_gray(&self) -> GrayImage {
        match self {
            InputImage::Gray(g) => g.clone(),
            InputImage::Rgb(c) => to_grayscale(c),
        }
    }

    pub fn to_rgb(&self) -> RgbImage {
        match self {
            InputImage::Gray(g) => RgbImage::from_gray(g),
            InputImage::Rgb(c) => c.clone(),
        }
    }
}

/// Round half-up, then clamp into a byte. NaN maps to 0.
#[inline]
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn from_dynamic(img: DynamicImage) -> Result<InputImage> {
    let color = img.color();
    let (w, h) = (img.width() as usize, img.height() as usize);
    if color.has_color() {
        let rgb = img.into_rgb8();
        let data = rgb.into_raw().into_iter().map(f64::from).collect();
        Ok(InputImage::Rgb(RgbImage::new(w, h, data)?))
    } else {
        let luma = img.into_luma8();
        let data = luma.into_raw().into_iter().map(f64::from).collect();
        Ok(InputImage::Gray(GrayImage::new(w, h, data)?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<InputImage> {
    let format = image::guess_format(bytes)?;
    match format {
        ImageFormat::Png | ImageFormat::Pnm => {}
        other => {
            return Err(Error::arg(format!("unsupported image format {other:?}")));
        }
    }
    from_dynamic(image::load_from_memory_with_format(bytes, format)?)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<InputImage> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}

pub fn gray_to_bytes(img: &GrayImage) -> Vec<u8> {
    img.data().iter().map(|&v| quantize(v)).collect()
}

fn gray_buffer(img: &GrayImage) -> image::GrayImage {
    image::GrayImage::from_raw(img.width() as u32, img.height() as u32, gray_to_bytes(img))
        .expect("buffer length matches dimensions")
}

fn rgb_buffer(img: &RgbImage) -> image::RgbImage {
    let raw = img.data().iter().map(|&v| quantize(v)).collect();
    image::RgbImage::from_raw(img.width() as u32, img.height() as u32, raw)
        .expect("buffer length matches dimensions")
}

fn encode(img: DynamicImage, format: ImageFormat) -> Result<Vec<u8>> {
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, format)?;
    Ok(out.into_inner())
}

pub fn encode_gray_png(img: &GrayImage) -> Result<Vec<u8>> {
    encode(DynamicImage::ImageLuma8(gray_buffer(img)), ImageFormat::Png)
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    encode(DynamicImage::ImageRgb8(rgb_buffer(img)), ImageFormat::Png)
}

/// Binary PGM (P5), maxval 255.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(gray_to_bytes(img));
    out
}

pub fn write_gray_png(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_gray_png(img)?)?;
    Ok(())
}

pub fn write_rgb_png(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    std::fs::write(path, encode_rgb_png(img)?)?;
    Ok(())
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Ground-truth loader: any nonzero sample is an edge, stored as 255.
pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<GrayImage> {
    let gray = read_image(path)?.to_gray();
    Ok(gray.map(|v| if v != 0.0 { 255.0 } else { 0.0 }))
}
