//! Boundary-detection scoring.
//!
//! Predicted edge pixels are matched one-to-one to ground-truth edge pixels
//! within a Euclidean tolerance. Matching is greedy: predictions are visited
//! in row-major order and each takes the nearest still-unmatched ground-truth
//! pixel, ties going to the first candidate in row-major order. Soft maps are
//! swept over a threshold grid to get precision/recall curves, which are then
//! aggregated into ODS, OIS and AP.
//!
//! Aggregates:
//! - `ods`: best threshold shared by all images, scoring each threshold by the
//!   mean of the per-image F-measures.
//! - `ods_pooled`: the same search, scoring by F of the dataset-summed tallies.
//! - `ois`: mean over images of each image's best F-measure.
//! - `ap`: area under the pooled precision/recall curve, precision made
//!   non-increasing in recall and held flat down to recall 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::imagecore::GrayImage;

/// Standard boundary-benchmark tolerance as a fraction of the image diagonal.
pub const DEFAULT_TOLERANCE_FRACTION: f64 = 0.0075;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchTally {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MatchTally {
    /// `tp / (tp + fp)`, or 1 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        let denom = self.tp + self.fp;
        if denom == 0 {
            1.0
        } else {
            self.tp as f64 / denom as f64
        }
    }

    /// `tp / (tp + fn)`, or 1 when the ground truth is empty.
    pub fn recall(&self) -> f64 {
        let denom = self.tp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            self.tp as f64 / denom as f64
        }
    }

    pub fn f_measure(&self) -> f64 {
        f_measure(self.precision(), self.recall())
    }
}

impl std::ops::Add for MatchTally {
    type Output = MatchTally;

    fn add(self, rhs: Self) -> Self {
        MatchTally {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
        }
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    let s = precision + recall;
    if s > 0.0 {
        2.0 * precision * recall / s
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
    pub tally: MatchTally,
}

impl PrPoint {
    pub fn from_tally(threshold: f64, tally: MatchTally) -> Self {
        Self {
            threshold,
            precision: tally.precision(),
            recall: tally.recall(),
            f: tally.f_measure(),
            tally,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ods: f64,
    pub ods_threshold: f64,
    pub ods_pooled: f64,
    /// Pooled F-measure at `ods_threshold`.
    pub f_at_ods: f64,
    pub ois: f64,
    pub ap: f64,
    pub per_image_curves: Vec<Vec<PrPoint>>,
}

/// Strictly increasing list of binarization levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid(Vec<f64>);

impl ThresholdGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::arg("threshold grid is empty"));
        }
        if levels.iter().any(|t| !t.is_finite()) || levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::arg(
                "thresholds must be finite and strictly increasing",
            ));
        }
        Ok(Self(levels))
    }

    /// `count` evenly spaced levels over `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::arg("threshold grid is empty")),
            1 => Self::new(vec![lo]),
            n => {
                let step = (hi - lo) / (n - 1) as f64;
                Self::new((0..n).map(|i| lo + step * i as f64).collect())
            }
        }
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }
}

impl Default for ThresholdGrid {
    /// 99 levels over `[1, 254]`.
    fn default() -> Self {
        Self::linspace(1.0, 254.0, 99).expect("static grid is valid")
    }
}

/// Tolerance for an image of the given size under the default fraction.
pub fn default_tolerance(width: usize, height: usize) -> f64 {
    DEFAULT_TOLERANCE_FRACTION * ((width * width + height * height) as f64).sqrt()
}

/// Candidate offsets within `tol`, ordered nearest first, then row-major.
/// Offsets beyond the image diagonal can never land inside, so the search
/// radius is capped there.
fn search_offsets(tol: f64, width: usize, height: usize) -> Vec<(isize, isize)> {
    let diag = ((width * width + height * height) as f64).sqrt();
    let tol = tol.min(diag);
    let r = tol.floor() as isize;
    let tol2 = tol * tol;
    let mut offsets: Vec<(isize, isize, isize)> = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = dx * dx + dy * dy;
            if (d2 as f64) <= tol2 {
                offsets.push((d2, dy, dx));
            }
        }
    }
    offsets.sort_unstable();
    offsets.into_iter().map(|(_, dy, dx)| (dx, dy)).collect()
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol >= 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "tolerance must be finite and >= 0, got {tol}"
        )))
    }
}

/// Greedy nearest-first one-to-one matching. Nonzero pixels are edges.
pub fn match_edges(pred: &GrayImage, gt: &GrayImage, tol: f64) -> Result<MatchTally> {
    pred.ensure_same_dims(gt)?;
    check_tolerance(tol)?;
    let pred_mask: Vec<bool> = pred.data().iter().map(|&v| v != 0.0).collect();
    let gt_mask: Vec<bool> = gt.data().iter().map(|&v| v != 0.0).collect();
    Ok(match_masks(
        &pred_mask,
        &gt_mask,
        gt.width(),
        gt.height(),
        &search_offsets(tol, gt.width(), gt.height()),
    ))
}

fn match_masks(
    pred: &[bool],
    gt: &[bool],
    width: usize,
    height: usize,
    offsets: &[(isize, isize)],
) -> MatchTally {
    let mut available = gt.to_vec();
    let gt_count = gt.iter().filter(|&&g| g).count();
    let mut tally = MatchTally::default();
    for (i, _) in pred.iter().enumerate().filter(|(_, &p)| p) {
        let (x, y) = ((i % width) as isize, (i / width) as isize);
        let hit = offsets.iter().find_map(|&(dx, dy)| {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                return None;
            }
            let j = ny as usize * width + nx as usize;
            available[j].then_some(j)
        });
        match hit {
            Some(j) => {
                available[j] = false;
                tally.tp += 1;
            }
            None => tally.fp += 1,
        }
    }
    tally.fn_ = gt_count - tally.tp;
    tally
}

pub fn pr_curve(
    soft: &GrayImage,
    gt: &GrayImage,
    thresholds: &ThresholdGrid,
    tol: f64,
) -> Result<Vec<PrPoint>> {
    pr_curve_with(soft, gt, thresholds, tol, false, Execution::default())
}

/// Sweep `soft >= t` over the grid. With `thin`, each binarized map is
/// skeletonized before matching.
pub fn pr_curve_with(
    soft: &GrayImage,
    gt: &GrayImage,
    thresholds: &ThresholdGrid,
    tol: f64,
    thin: bool,
    exec: Execution,
) -> Result<Vec<PrPoint>> {
    soft.ensure_same_dims(gt)?;
    check_tolerance(tol)?;
    let (w, h) = gt.dims();
    let offsets = search_offsets(tol, w, h);
    let gt_mask: Vec<bool> = gt.data().iter().map(|&v| v != 0.0).collect();
    let levels = thresholds.levels();
    Ok(exec.map_indices(levels.len(), |i| {
        let t = levels[i];
        let mut pred: Vec<bool> = soft.data().iter().map(|&v| v >= t).collect();
        if thin {
            thin_mask(&mut pred, w, h);
        }
        PrPoint::from_tally(t, match_masks(&pred, &gt_mask, w, h, &offsets))
    }))
}

pub fn dataset_scores(curves: Vec<Vec<PrPoint>>) -> Result<EvalReport> {
    let first = curves
        .first()
        .ok_or_else(|| Error::arg("cannot score an empty dataset"))?;
    if first.is_empty() {
        return Err(Error::arg("per-image curves are empty"));
    }
    let grid: Vec<f64> = first.iter().map(|p| p.threshold).collect();
    for c in &curves {
        if c.len() != grid.len() || c.iter().zip(&grid).any(|(p, t)| p.threshold != *t) {
            return Err(Error::arg("per-image curves do not share a threshold grid"));
        }
    }
    let n = curves.len() as f64;

    let mut ods = f64::NEG_INFINITY;
    let mut ods_index = 0;
    let mut pooled = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        let mean_f = curves.iter().map(|c| c[k].f).sum::<f64>() / n;
        if mean_f > ods {
            ods = mean_f;
            ods_index = k;
        }
        let tally = curves
            .iter()
            .fold(MatchTally::default(), |acc, c| acc + c[k].tally);
        pooled.push(PrPoint::from_tally(t, tally));
    }

    let ods_pooled = pooled.iter().map(|p| p.f).fold(0.0, f64::max);
    let ois = curves
        .iter()
        .map(|c| c.iter().map(|p| p.f).fold(0.0, f64::max))
        .sum::<f64>()
        / n;

    Ok(EvalReport {
        ods,
        ods_threshold: grid[ods_index],
        ods_pooled,
        f_at_ods: pooled[ods_index].f,
        ois,
        ap: average_precision(&pooled),
        per_image_curves: curves,
    })
}

/// Trapezoidal area under precision(recall), precision replaced by its
/// running maximum from the high-recall end and extended flat to recall 0.
pub fn average_precision(points: &[PrPoint]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut pr: Vec<(f64, f64)> = points.iter().map(|p| (p.recall, p.precision)).collect();
    pr.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut best = 0.0f64;
    for p in pr.iter_mut().rev() {
        best = best.max(p.1);
        p.1 = best;
    }
    let mut area = 0.0;
    let mut prev = (0.0, pr[0].1);
    for &(r, p) in &pr {
        area += (r - prev.0) * (p + prev.1) / 2.0;
        prev = (r, p);
    }
    area
}

/// Zhang-Suen skeletonization of a binary map. Nonzero pixels are
/// foreground; the result is `{0, 255}`.
pub fn thin(binary: &GrayImage) -> GrayImage {
    let mut mask: Vec<bool> = binary.data().iter().map(|&v| v != 0.0).collect();
    thin_mask(&mut mask, binary.width(), binary.height());
    let data = mask
        .into_iter()
        .map(|b| if b { 255.0 } else { 0.0 })
        .collect();
    GrayImage::new(binary.width(), binary.height(), data).expect("same dimensions")
}

fn thin_mask(mask: &mut [bool], w: usize, h: usize) {
    let at = |m: &[bool], x: isize, y: isize| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && m[y as usize * w + x as usize]
    };
    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            doomed.clear();
            for y in 0..h as isize {
                for x in 0..w as isize {
                    if !at(mask, x, y) {
                        continue;
                    }
                    // P2..P9 clockwise from north.
                    let p = [
                        at(mask, x, y - 1),
                        at(mask, x + 1, y - 1),
                        at(mask, x + 1, y),
                        at(mask, x + 1, y + 1),
                        at(mask, x, y + 1),
                        at(mask, x - 1, y + 1),
                        at(mask, x - 1, y),
                        at(mask, x - 1, y - 1),
                    ];
                    let b = p.iter().filter(|&&v| v).count();
                    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
                    let (p2, p4, p6, p8) = (p[0], p[2], p[4], p[6]);
                    let cond = if pass == 0 {
                        !(p2 && p4 && p6) && !(p4 && p6 && p8)
                    } else {
                        !(p2 && p4 && p8) && !(p2 && p6 && p8)
                    };
                    if (2..=6).contains(&b) && a == 1 && cond {
                        doomed.push(y as usize * w + x as usize);
                    }
                }
            }
            for &i in &doomed {
                mask[i] = false;
            }
            changed |= !doomed.is_empty();
        }
        if !changed {
            break;
        }
    }
}
