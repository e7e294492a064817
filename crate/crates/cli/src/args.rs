//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qiedge::{Stencil, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "qiedge",
    version,
    about = "Training-free edge detection with diffusion refinement and hybrid Canny/Laplacian fusion",
    after_help = "Configuration comes from flags and an optional --config JSON file only; \
                  no environment variables are read. Flags override the config file, \
                  which overrides the built-in defaults."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect edges in a batch of images, optionally scoring and noise-sweeping them.
    Detect(RunArgs),
    /// Score all four pipeline variants against ground truth.
    Ablate(RunArgs),
    /// Write the synthetic shapes suite (images and exact boundary ground truth).
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Input image files or directories (PNG or binary PGM).
    #[arg(long, num_args = 1.., value_name = "PATH")]
    pub input: Vec<PathBuf>,
    /// Directory of ground-truth boundary maps named after the input stems.
    #[arg(long, value_name = "DIR")]
    pub gt: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Report path [default: <output>/report.json].
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// JSON file with any of the tunables below, using snake_case keys.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    /// Diffusion step size [default: 0.1].
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Number of diffusion steps [default: 10].
    #[arg(long)]
    pub time_steps: Option<usize>,
    /// Laplacian stencil: four-neighbor or weighted [default: four-neighbor].
    #[arg(long, value_parser = parse_stencil)]
    pub stencil: Option<Stencil>,
    /// Gaussian sigma [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub blur_sigma: Option<f64>,
    /// Gaussian kernel radius [default: 1].
    #[arg(long)]
    pub blur_radius: Option<usize>,
    /// Canny low threshold [default: 50].
    #[arg(long, allow_negative_numbers = true)]
    pub t_low: Option<f64>,
    /// Canny high threshold [default: 150].
    #[arg(long, allow_negative_numbers = true)]
    pub t_high: Option<f64>,
    /// Level used to binarize the fused map for statistics and overlays [default: 128].
    #[arg(long, allow_negative_numbers = true)]
    pub binarize_at: Option<f64>,
    /// Match tolerance in pixels [default: 0.0075 x image diagonal].
    #[arg(long, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
    /// Number of evenly spaced thresholds over [1, 254] [default: 99].
    #[arg(long)]
    pub threshold_levels: Option<usize>,
    /// Thin binarized maps before matching.
    #[arg(long)]
    pub thin: bool,
    /// Comma-separated noise levels; each gets its own output subdirectory.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub noise_sigmas: Option<Vec<f64>>,
    /// Base seed for the noise generator [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write overlays in this color, given as R,G,B.
    #[arg(long, value_parser = parse_color, value_name = "R,G,B")]
    pub overlay_color: Option<[u8; 3]>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
    /// Permit writing into a directory that also holds inputs.
    #[arg(long)]
    pub allow_same_dir: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    pub output: PathBuf,
    /// Canvas side in pixels.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_stencil(s: &str) -> Result<Stencil, String> {
    match s {
        "four-neighbor" => Ok(Stencil::FourNeighbor),
        "weighted" => Ok(Stencil::Weighted),
        _ => Err("expected four-neighbor or weighted".into()),
    }
}

fn parse_color(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated components".into());
    }
    let mut rgb = [0u8; 3];
    for (slot, part) in rgb.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("`{part}` is not an integer in 0..=255"))?;
    }
    Ok(rgb)
}
