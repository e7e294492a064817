//! Training-free edge detection.
//!
//! The detector refines a grayscale image with an explicit Laplacian diffusion
//! iteration, blurs it, and fuses a Canny edge map with a clipped Laplacian
//! response by pointwise maximum. The crate also carries the evaluation side:
//! tolerant pixel matching, precision/recall sweeps and the ODS/OIS/AP
//! aggregates, seeded Gaussian noise for robustness sweeps, and a synthetic
//! shape generator with exact boundary ground truth.
//!
//! Row-parallel kernels run on rayon when the `parallel` feature is enabled
//! (the default). Every entry point that does real work also has a `_with`
//! variant taking an [`Execution`] policy so both paths can be compared.

pub mod canny;
pub mod diffusion;
pub mod edgefilters;
pub mod error;
pub mod exec;
pub mod imagecore;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod pipeline;
pub mod synthetic;

pub use crate::canny::{canny, hysteresis, non_max_suppression, CannyThresholds};
pub use crate::diffusion::{diffuse_step, evolve, laplacian, DiffusionConfig, Stencil};
pub use crate::edgefilters::{
    gaussian_blur, gaussian_kernel, laplacian_edge_map, sobel_edge_map, sobel_gradients,
    GaussianSpec, GradientField,
};
pub use crate::error::{Error, Result};
pub use crate::exec::Execution;
pub use crate::imagecore::{clip_intensity, convolve, to_grayscale, GrayImage, Kernel, RgbImage};
pub use crate::metrics::{
    dataset_scores, match_edges, pr_curve, EvalReport, MatchTally, PrPoint, ThresholdGrid,
};
pub use crate::noise::{add_gaussian_noise, NoiseSpec};
pub use crate::pipeline::{
    hybrid_fuse, overlay, run_pipeline, EdgeResult, PipelineConfig, StageTimes, Variant,
};
