//! Batch execution: load, (optionally) add noise, detect, write, score.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use qiedge::io::{read_ground_truth, read_image, write_gray_png, write_rgb_png, InputImage};
use qiedge::metrics::{default_tolerance, pr_curve_with};
use qiedge::pipeline::run_pipeline_with;
use qiedge::{
    add_gaussian_noise, dataset_scores, overlay, EdgeResult, Execution, GrayImage, NoiseSpec,
    PrPoint, RgbImage, Variant,
};
use rayon::prelude::*;

use crate::report::{
    AblationRow, EdgeStats, Evaluation, Failure, ImageRecord, ImageTiming, RunReport, ScoreSummary,
    SweepRow, ToolInfo, Volatile, SCHEMA_VERSION,
};
use crate::settings::{Mode, RunManifest, IMAGE_EXTENSIONS};
use crate::{EXIT_FAILURE, EXIT_OK};

pub struct BatchOutcome {
    pub report: RunReport,
    pub exit_code: u8,
}

struct Loaded {
    label: String,
    stem: String,
    image: InputImage,
    gt: Option<(String, GrayImage)>,
}

/// One sweep over all loaded images with a fixed variant and noise level.
struct Pass {
    variant: Variant,
    sigma: Option<f64>,
    dir: PathBuf,
}

struct Processed {
    record: ImageRecord,
    timing: ImageTiming,
    curve: Option<Vec<PrPoint>>,
}

fn failure(label: &str, stage: &str, pass: Option<&Pass>, error: impl ToString) -> Failure {
    Failure {
        input: label.to_owned(),
        stage: stage.to_owned(),
        variant: pass.map(|p| p.variant),
        noise_sigma: pass.and_then(|p| p.sigma),
        error: error.to_string(),
    }
}

/// Per-image noise seed: the base seed mixed with the file stem, so a given
/// image sees the same noise field regardless of batch order or sigma.
pub fn noise_seed(base: u64, stem: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stem.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sigma_dir_name(sigma: f64) -> String {
    format!("sigma_{sigma}")
}

fn passes(m: &RunManifest) -> Vec<Pass> {
    match m.mode {
        Mode::Ablate => Variant::ALL
            .into_iter()
            .map(|variant| Pass {
                variant,
                sigma: None,
                dir: m.output.join(variant.name()),
            })
            .collect(),
        Mode::Detect => match &m.settings.noise_sigmas {
            None => vec![Pass {
                variant: m.pipeline.variant,
                sigma: None,
                dir: m.output.clone(),
            }],
            Some(sigmas) => sigmas
                .iter()
                .map(|&s| Pass {
                    variant: m.pipeline.variant,
                    sigma: Some(s),
                    dir: m.output.join(sigma_dir_name(s)),
                })
                .collect(),
        },
    }
}

fn find_ground_truth(dir: &Path, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

fn load(path: &Path, m: &RunManifest) -> Result<Loaded, Failure> {
    let label = path.display().to_string();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| label.clone());
    let image = read_image(path).map_err(|e| failure(&label, "decode", None, e))?;
    let gt = match &m.settings.gt {
        None => None,
        Some(dir) => {
            let gt_path = find_ground_truth(dir, &stem).ok_or_else(|| {
                failure(
                    &label,
                    "ground-truth",
                    None,
                    format!("no ground truth for `{stem}` in {}", dir.display()),
                )
            })?;
            let gt = read_ground_truth(&gt_path)
                .map_err(|e| failure(&label, "ground-truth", None, e))?;
            if gt.dims() != image.dims() {
                return Err(failure(
                    &label,
                    "ground-truth",
                    None,
                    format!(
                        "ground truth is {:?}, image is {:?}",
                        gt.dims(),
                        image.dims()
                    ),
                ));
            }
            Some((gt_path.display().to_string(), gt))
        }
    };
    Ok(Loaded {
        label,
        stem,
        image,
        gt,
    })
}

fn edge_stats(result: &EdgeResult, level: f64) -> EdgeStats {
    let soft = &result.e_hybrid;
    let edge_pixels = soft.count_at_least(level);
    let n = soft.len().max(1) as f64;
    EdgeStats {
        binarize_at: level,
        edge_pixels,
        edge_fraction: edge_pixels as f64 / n,
        mean_response: soft.sum() / n,
        max_response: soft.min_max().1,
    }
}

fn process(item: &Loaded, pass: &Pass, m: &RunManifest) -> Result<Processed, Failure> {
    let exec = Execution::Parallel;
    let cfg = m.pipeline.with_variant(pass.variant);
    let fail = |stage: &str, e: &dyn std::fmt::Display| failure(&item.label, stage, Some(pass), e);

    let (result, noise_seed, base): (EdgeResult, Option<u64>, RgbImage) = match pass.sigma {
        None => {
            let r = match &item.image {
                InputImage::Gray(g) => run_pipeline_with(g, &cfg, exec),
                InputImage::Rgb(c) => run_pipeline_with(c, &cfg, exec),
            };
            (
                r.map_err(|e| fail("pipeline", &e))?,
                None,
                item.image.to_rgb(),
            )
        }
        Some(sigma) => {
            let seed = noise_seed(m.settings.seed, &item.stem);
            let noisy = add_gaussian_noise(&item.image.to_gray(), &NoiseSpec { sigma, seed })
                .map_err(|e| fail("noise", &e))?;
            let r = run_pipeline_with(&noisy, &cfg, exec).map_err(|e| fail("pipeline", &e))?;
            (r, Some(seed), RgbImage::from_gray(&noisy))
        }
    };

    let edge_path = pass.dir.join(format!("{}_edges.png", item.stem));
    write_gray_png(&edge_path, &result.e_hybrid).map_err(|e| fail("write", &e))?;

    let overlay_path = match m.settings.overlay_color {
        None => None,
        Some(rgb) => {
            let color = rgb.map(f64::from);
            let painted = overlay(&base, &result.binary(m.pipeline.binarize_at), color)
                .map_err(|e| fail("overlay", &e))?;
            let path = pass.dir.join(format!("{}_overlay.png", item.stem));
            write_rgb_png(&path, &painted).map_err(|e| fail("write", &e))?;
            Some(path.display().to_string())
        }
    };

    let (w, h) = item.image.dims();
    let (tolerance, curve) = match &item.gt {
        None => (None, None),
        Some((_, gt)) => {
            let tol = m
                .settings
                .tolerance
                .unwrap_or_else(|| default_tolerance(w, h));
            let curve = pr_curve_with(&result.e_hybrid, gt, &m.grid, tol, m.settings.thin, exec)
                .map_err(|e| fail("evaluate", &e))?;
            (Some(tol), Some(curve))
        }
    };
    let best_f = curve
        .as_ref()
        .map(|c| c.iter().map(|p| p.f).fold(0.0, f64::max));

    Ok(Processed {
        record: ImageRecord {
            input: item.label.clone(),
            ground_truth: item.gt.as_ref().map(|(p, _)| p.clone()),
            variant: pass.variant,
            noise_sigma: pass.sigma,
            noise_seed,
            width: w,
            height: h,
            channels: match item.image {
                InputImage::Gray(_) => 1,
                InputImage::Rgb(_) => 3,
            },
            edge_map: edge_path.display().to_string(),
            overlay: overlay_path,
            edges: edge_stats(&result, m.pipeline.binarize_at),
            tolerance,
            best_f,
        },
        timing: ImageTiming {
            input: item.label.clone(),
            variant: pass.variant,
            noise_sigma: pass.sigma,
            stage_times: result.stage_times,
        },
        curve,
    })
}

pub fn run_batch(m: &RunManifest) -> anyhow::Result<BatchOutcome> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(m.settings.threads.unwrap_or(0))
        .build()
        .context("cannot start worker pool")?;

    let mut failures = Vec::new();
    let mut items = Vec::new();
    let loaded: Vec<Result<Loaded, Failure>> =
        pool.install(|| m.images.par_iter().map(|p| load(p, m)).collect());
    for entry in loaded {
        match entry {
            Ok(item) if items.iter().any(|o: &Loaded| o.stem == item.stem) => {
                failures.push(failure(
                    &item.label,
                    "decode",
                    None,
                    format!("another input already uses the output name `{}`", item.stem),
                ));
            }
            Ok(item) => items.push(item),
            Err(f) => failures.push(f),
        }
    }

    let mut images = Vec::new();
    let mut timings = Vec::new();
    let mut evaluation = None;
    let mut sweep = Vec::new();
    let mut ablation = Vec::new();
    for pass in passes(m) {
        fs::create_dir_all(&pass.dir)
            .with_context(|| format!("cannot create {}", pass.dir.display()))?;
        let results: Vec<Result<Processed, Failure>> =
            pool.install(|| items.par_iter().map(|it| process(it, &pass, m)).collect());

        let mut scored = Vec::new();
        let mut curves = Vec::new();
        for r in results {
            match r {
                Ok(p) => {
                    if let Some(c) = p.curve {
                        scored.push(p.record.input.clone());
                        curves.push(c);
                    }
                    images.push(p.record);
                    timings.push(p.timing);
                }
                Err(f) => failures.push(f),
            }
        }
        if curves.is_empty() {
            continue;
        }
        let scores = dataset_scores(curves)?;
        let summary = ScoreSummary::from(&scores);
        match (m.mode, pass.sigma) {
            (Mode::Ablate, _) => ablation.push(AblationRow {
                variant: pass.variant,
                images: scored.len(),
                scores: summary,
            }),
            (Mode::Detect, Some(sigma)) => sweep.push(SweepRow {
                sigma,
                images: scored.len(),
                scores: summary,
            }),
            (Mode::Detect, None) => {
                evaluation = Some(Evaluation {
                    images: scored,
                    scores,
                })
            }
        }
    }

    let exit_code = if images.is_empty() || !failures.is_empty() {
        EXIT_FAILURE
    } else {
        EXIT_OK
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo::current(),
        command: m.mode.name().to_owned(),
        config: m.settings.clone(),
        warnings: m.warnings.clone(),
        images,
        failures,
        evaluation,
        noise_sweep: m.settings.noise_sigmas.as_ref().map(|_| sweep),
        ablation: (m.mode == Mode::Ablate).then_some(ablation),
        volatile: Volatile {
            total_seconds: start.elapsed().as_secs_f64(),
            threads: pool.current_num_threads(),
            images: timings,
        },
    };

    if let Some(parent) = m.report.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(&m.report, report.to_json())
        .with_context(|| format!("cannot write report {}", m.report.display()))?;
    Ok(BatchOutcome { report, exit_code })
}
