//! End-to-end detector: diffusion refinement, Gaussian smoothing, and the
//! max-fusion of a Canny map with a clipped Laplacian response. The four
//! [`Variant`]s switch stages off to form the ablation ladder.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::canny::{canny_on_blurred, CannyThresholds};
use crate::diffusion::{evolve_with, DiffusionConfig};
use crate::edgefilters::{
    gaussian_blur_with, laplacian_edge_map_with, sobel_edge_map_with, GaussianSpec,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagecore::{to_grayscale, GrayImage, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Rescaled Sobel magnitude of the raw grayscale image.
    #[serde(rename = "sobel")]
    SobelOnly,
    /// Diffusion refinement, then the rescaled Sobel magnitude.
    SchrodingerSobel,
    /// Blur + Canny/Laplacian fusion without refinement.
    #[serde(rename = "hybrid")]
    HybridOnly,
    /// Refinement followed by the hybrid stage.
    #[default]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::SobelOnly,
        Variant::SchrodingerSobel,
        Variant::HybridOnly,
        Variant::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SobelOnly => "sobel",
            Variant::SchrodingerSobel => "schrodinger-sobel",
            Variant::HybridOnly => "hybrid",
            Variant::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    fn refines(self) -> bool {
        matches!(self, Variant::SchrodingerSobel | Variant::Full)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub variant: Variant,
    pub diffusion: DiffusionConfig,
    pub blur: GaussianSpec,
    pub thresholds: CannyThresholds,
    /// Level at which the soft fused map is cut to a binary edge map.
    pub binarize_at: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            diffusion: DiffusionConfig::default(),
            blur: GaussianSpec::default(),
            thresholds: CannyThresholds::default(),
            binarize_at: 128.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.diffusion.validate()?;
        self.blur.validate()?;
        self.thresholds.validate()?;
        if !self.binarize_at.is_finite() {
            return Err(Error::arg("binarize_at must be finite"));
        }
        Ok(())
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }
}

/// Wall-clock seconds per stage. Stages a variant skips stay at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimes {
    pub grayscale: f64,
    pub diffusion: f64,
    pub blur: f64,
    pub canny: f64,
    pub laplacian: f64,
    pub sobel: f64,
    pub fusion: f64,
    pub total: f64,
}

impl StageTimes {
    pub fn stage_sum(&self) -> f64 {
        self.grayscale
            + self.diffusion
            + self.blur
            + self.canny
            + self.laplacian
            + self.sobel
            + self.fusion
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeResult {
    pub variant: Variant,
    /// Diffusion output (the grayscale input itself when refinement is off).
    pub refined: GrayImage,
    pub blurred: Option<GrayImage>,
    /// Binary `{0, 255}`.
    pub e_canny: Option<GrayImage>,
    pub e_lap: Option<GrayImage>,
    /// Soft response in `[0, 255]`.
    pub e_hybrid: GrayImage,
    pub stage_times: StageTimes,
}

impl EdgeResult {
    /// `e_hybrid` cut at `level` into `{0, 255}`.
    pub fn binary(&self, level: f64) -> GrayImage {
        self.e_hybrid.binarize(level)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PipelineInput<'a> {
    Gray(&'a GrayImage),
    Rgb(&'a RgbImage),
}

impl<'a> From<&'a GrayImage> for PipelineInput<'a> {
    fn from(img: &'a GrayImage) -> Self {
        PipelineInput::Gray(img)
    }
}

impl<'a> From<&'a RgbImage> for PipelineInput<'a> {
    fn from(img: &'a RgbImage) -> Self {
        PipelineInput::Rgb(img)
    }
}

/// Pointwise maximum. Canny maps are expected on the `{0, 255}` scale.
pub fn hybrid_fuse(e_canny: &GrayImage, e_lap: &GrayImage) -> Result<GrayImage> {
    e_canny.zip_map(e_lap, f64::max)
}

pub fn run_pipeline<'a>(
    img: impl Into<PipelineInput<'a>>,
    cfg: &PipelineConfig,
) -> Result<EdgeResult> {
    run_pipeline_with(img, cfg, Execution::default())
}

pub fn run_pipeline_with<'a>(
    img: impl Into<PipelineInput<'a>>,
    cfg: &PipelineConfig,
    exec: Execution,
) -> Result<EdgeResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut times = StageTimes::default();
    let lap_time = |t: &mut f64, since: Instant| *t = since.elapsed().as_secs_f64();

    let t = Instant::now();
    let gray = match img.into() {
        PipelineInput::Gray(g) => g.clone(),
        PipelineInput::Rgb(c) => to_grayscale(c),
    };
    lap_time(&mut times.grayscale, t);

    let t = Instant::now();
    let refined = if cfg.variant.refines() {
        evolve_with(&gray, &cfg.diffusion, exec)?
    } else {
        gray
    };
    lap_time(&mut times.diffusion, t);

    let mut result = match cfg.variant {
        Variant::SobelOnly | Variant::SchrodingerSobel => {
            let t = Instant::now();
            let e_hybrid = sobel_edge_map_with(&refined, exec);
            lap_time(&mut times.sobel, t);
            EdgeResult {
                variant: cfg.variant,
                refined,
                blurred: None,
                e_canny: None,
                e_lap: None,
                e_hybrid,
                stage_times: times,
            }
        }
        Variant::HybridOnly | Variant::Full => {
            let t = Instant::now();
            let blurred = gaussian_blur_with(&refined, &cfg.blur, exec)?;
            lap_time(&mut times.blur, t);

            let t = Instant::now();
            let e_canny = canny_on_blurred(&blurred, &cfg.thresholds, exec)?;
            lap_time(&mut times.canny, t);

            let t = Instant::now();
            let e_lap = laplacian_edge_map_with(&blurred, exec);
            lap_time(&mut times.laplacian, t);

            let t = Instant::now();
            let e_hybrid = hybrid_fuse(&e_canny, &e_lap)?;
            lap_time(&mut times.fusion, t);

            EdgeResult {
                variant: cfg.variant,
                refined,
                blurred: Some(blurred),
                e_canny: Some(e_canny),
                e_lap: Some(e_lap),
                e_hybrid,
                stage_times: times,
            }
        }
    };
    result.stage_times.total = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Copy of `original` with every nonzero pixel of `edges` painted `color`.
pub fn overlay(original: &RgbImage, edges: &GrayImage, color: [f64; 3]) -> Result<RgbImage> {
    if original.dims() != edges.dims() {
        return Err(Error::DimensionMismatch {
            left_w: original.width(),
            left_h: original.height(),
            right_w: edges.width(),
            right_h: edges.height(),
        });
    }
    if color.iter().any(|c| !(0.0..=255.0).contains(c)) {
        return Err(Error::arg(format!(
            "overlay color {color:?} outside [0, 255]"
        )));
    }
    let mut out = original.clone();
    for y in 0..edges.height() {
        for x in 0..edges.width() {
            if edges.get(x, y) != 0.0 {
                out.set_pixel(x, y, color);
            }
        }
    }
    Ok(out)
}
