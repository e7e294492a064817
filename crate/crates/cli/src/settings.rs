//! Resolution of flags, config file and defaults into a validated run manifest.

use std::fmt;
use std::path::{Path, PathBuf};

use qiedge::diffusion::STABLE_DELTA_MAX;
use qiedge::{
    CannyThresholds, DiffusionConfig, GaussianSpec, PipelineConfig, Stencil, ThresholdGrid, Variant,
};
use serde::{Deserialize, Serialize};

use crate::args::RunArgs;

/// Extensions picked up when an input is a directory.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "pnm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// Every tunable of a batch run. This is both the config-file format and the
/// config echo written into reports; missing keys take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub input: Vec<PathBuf>,
    pub gt: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub variant: Variant,
    pub delta: f64,
    pub time_steps: usize,
    pub stencil: Stencil,
    pub blur_sigma: f64,
    pub blur_radius: usize,
    pub t_low: f64,
    pub t_high: f64,
    pub binarize_at: f64,
    pub tolerance: Option<f64>,
    pub threshold_levels: usize,
    pub thin: bool,
    pub noise_sigmas: Option<Vec<f64>>,
    pub seed: u64,
    pub overlay_color: Option<[u8; 3]>,
    pub threads: Option<usize>,
    pub allow_same_dir: bool,
}

impl Default for Settings {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            input: Vec::new(),
            gt: None,
            output: None,
            report: None,
            variant: p.variant,
            delta: p.diffusion.delta,
            time_steps: p.diffusion.time_steps,
            stencil: p.diffusion.stencil,
            blur_sigma: p.blur.sigma,
            blur_radius: p.blur.radius,
            t_low: p.thresholds.low,
            t_high: p.thresholds.high,
            binarize_at: p.binarize_at,
            tolerance: None,
            threshold_levels: 99,
            thin: false,
            noise_sigmas: None,
            seed: 0,
            overlay_color: None,
            threads: None,
            allow_same_dir: false,
        }
    }
}

impl Settings {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        serde_json::from_str(text).map_err(|e| usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
    }

    /// Overwrite every field the command line set explicitly.
    pub fn apply(&mut self, a: &RunArgs) {
        if !a.input.is_empty() {
            self.input = a.input.clone();
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &a.$field {
                    self.$field = v.clone().into();
                }
            )*};
        }
        take!(
            gt,
            output,
            report,
            tolerance,
            noise_sigmas,
            overlay_color,
            threads
        );
        take!(variant, delta, time_steps, stencil, blur_sigma, blur_radius);
        take!(t_low, t_high, binarize_at, threshold_levels, seed);
        self.thin |= a.thin;
        self.allow_same_dir |= a.allow_same_dir;
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            variant: self.variant,
            diffusion: DiffusionConfig {
                delta: self.delta,
                time_steps: self.time_steps,
                stencil: self.stencil,
            },
            blur: GaussianSpec {
                sigma: self.blur_sigma,
                radius: self.blur_radius,
            },
            thresholds: CannyThresholds {
                low: self.t_low,
                high: self.t_high,
            },
            binarize_at: self.binarize_at,
        }
    }

    pub fn threshold_grid(&self) -> Result<ThresholdGrid, UsageError> {
        ThresholdGrid::linspace(1.0, 254.0, self.threshold_levels)
            .map_err(|e| usage(format!("threshold_levels: {e}")))
    }

    /// Range checks that need no file system access.
    pub fn validate(&self) -> Result<(), UsageError> {
        self.pipeline()
            .validate()
            .map_err(|e| usage(e.to_string()))?;
        self.threshold_grid()?;
        if let Some(tol) = self.tolerance {
            if !(tol >= 0.0 && tol.is_finite()) {
                return Err(usage(format!(
                    "tolerance must be finite and >= 0, got {tol}"
                )));
            }
        }
        if let Some(sigmas) = &self.noise_sigmas {
            if sigmas.is_empty() {
                return Err(usage("noise_sigmas is empty"));
            }
            if let Some(bad) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
                return Err(usage(format!(
                    "noise sigmas must be finite and >= 0, got {bad}"
                )));
            }
            for (i, s) in sigmas.iter().enumerate() {
                if sigmas[..i].contains(s) {
                    return Err(usage(format!("noise sigma {s} is listed twice")));
                }
            }
        }
        if self.threads == Some(0) {
            return Err(usage("threads must be at least 1"));
        }
        Ok(())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta > STABLE_DELTA_MAX && self.variant_uses_diffusion() {
            out.push(format!(
                "delta {} exceeds {STABLE_DELTA_MAX}; the explicit update can oscillate and leans on clipping",
                self.delta
            ));
        }
        out
    }

    fn variant_uses_diffusion(&self) -> bool {
        matches!(self.variant, Variant::SchrodingerSobel | Variant::Full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Detect,
    Ablate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Detect => "detect",
            Mode::Ablate => "ablate",
        }
    }
}

/// A validated batch run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub mode: Mode,
    pub settings: Settings,
    pub pipeline: PipelineConfig,
    pub grid: ThresholdGrid,
    /// Expanded input files in processing order.
    pub images: Vec<PathBuf>,
    pub output: PathBuf,
    pub report: PathBuf,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn resolve(mode: Mode, args: &RunArgs) -> Result<Self, UsageError> {
        let mut settings = match &args.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        settings.apply(args);
        Self::from_settings(mode, settings)
    }

    pub fn from_settings(mode: Mode, settings: Settings) -> Result<Self, UsageError> {
        settings.validate()?;
        if settings.input.is_empty() {
            return Err(usage("no --input given"));
        }
        let output = settings
            .output
            .clone()
            .ok_or_else(|| usage("no --output given"))?;
        if mode == Mode::Ablate {
            if settings.gt.is_none() {
                return Err(usage("ablate needs --gt"));
            }
            if settings.noise_sigmas.is_some() {
                return Err(usage("ablate does not take noise sigmas"));
            }
        }
        if let Some(gt) = &settings.gt {
            if !gt.is_dir() {
                return Err(usage(format!(
                    "ground-truth directory {} not found",
                    gt.display()
                )));
            }
        }

        let images = expand_inputs(&settings.input)?;
        if !settings.allow_same_dir {
            let out = normalized(&output);
            for dir in input_dirs(&settings.input) {
                if normalized(&dir) == out {
                    return Err(usage(format!(
                        "output directory {} also holds inputs; pass --allow-same-dir to permit this",
                        output.display()
                    )));
                }
            }
        }

        let report = settings
            .report
            .clone()
            .unwrap_or_else(|| output.join("report.json"));
        Ok(Self {
            mode,
            pipeline: settings.pipeline(),
            grid: settings.threshold_grid()?,
            images,
            output,
            report,
            warnings: settings.warnings(),
            settings,
        })
    }
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|k| e.eq_ignore_ascii_case(k)))
}

/// Files are taken as given; directories contribute their image files in
/// sorted order (not recursive).
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, UsageError> {
    let mut out = Vec::new();
    for path in inputs {
        if path.is_dir() {
            let entries = std::fs::read_dir(path)
                .map_err(|e| usage(format!("cannot list {}: {e}", path.display())))?;
            let mut files: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && has_image_extension(p))
                .collect();
            files.sort();
            out.extend(files);
        } else if path.is_file() {
            out.push(path.clone());
        } else {
            return Err(usage(format!("input {} not found", path.display())));
        }
    }
    if out.is_empty() {
        return Err(usage("no input images found"));
    }
    Ok(out)
}

fn input_dirs(inputs: &[PathBuf]) -> Vec<PathBuf> {
    inputs
        .iter()
        .map(|p| {
            if p.is_dir() {
                p.clone()
            } else {
                match p.parent() {
                    Some(parent) if !parent.as_os_str().is_empty() => parent.to_path_buf(),
                    _ => PathBuf::from("."),
                }
            }
        })
        .collect()
}

/// Canonical form when the path exists, else the canonical parent joined with
/// the final component.
fn normalized(path: &Path) -> PathBuf {
    if let Ok(p) = path.canonicalize() {
        return p;
    }
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    match (parent.canonicalize(), path.file_name()) {
        (Ok(base), Some(name)) => base.join(name),
        _ => path.to_path_buf(),
    }
}
