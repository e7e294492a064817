//! JSON run report.
//!
//! Everything outside `volatile` is a deterministic function of the inputs
//! and the resolved config. Wall-clock timings live under `volatile`.

use qiedge::{EvalReport, StageTimes, Variant};
use serde::{Deserialize, Serialize};

use crate::settings::Settings;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: String,
    pub config: Settings,
    pub warnings: Vec<String>,
    pub images: Vec<ImageRecord>,
    pub failures: Vec<Failure>,
    pub evaluation: Option<Evaluation>,
    pub noise_sweep: Option<Vec<SweepRow>>,
    pub ablation: Option<Vec<AblationRow>>,
    pub volatile: Volatile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "qiedge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub input: String,
    pub ground_truth: Option<String>,
    pub variant: Variant,
    pub noise_sigma: Option<f64>,
    pub noise_seed: Option<u64>,
    pub width: usize,
    pub height: usize,
    pub channels: u8,
    pub edge_map: String,
    pub overlay: Option<String>,
    pub edges: EdgeStats,
    /// Match tolerance in pixels, present when the image was scored.
    pub tolerance: Option<f64>,
    /// Best F-measure over the threshold grid, present when scored.
    pub best_f: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub binarize_at: f64,
    pub edge_pixels: usize,
    pub edge_fraction: f64,
    pub mean_response: f64,
    pub max_response: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub input: String,
    pub stage: String,
    pub variant: Option<Variant>,
    pub noise_sigma: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub ods: f64,
    pub ods_threshold: f64,
    pub ods_pooled: f64,
    pub f_at_ods: f64,
    pub ois: f64,
    pub ap: f64,
}

impl From<&EvalReport> for ScoreSummary {
    fn from(r: &EvalReport) -> Self {
        Self {
            ods: r.ods,
            ods_threshold: r.ods_threshold,
            ods_pooled: r.ods_pooled,
            f_at_ods: r.f_at_ods,
            ois: r.ois,
            ap: r.ap,
        }
    }
}

/// Dataset scores plus per-image curves, in the order of `images`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub images: Vec<String>,
    #[serde(flatten)]
    pub scores: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub images: usize,
    #[serde(flatten)]
    pub scores: ScoreSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Variant,
    pub images: usize,
    #[serde(flatten)]
    pub scores: ScoreSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volatile {
    pub total_seconds: f64,
    pub threads: usize,
    /// Aligned with the top-level `images` list.
    pub images: Vec<ImageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTiming {
    pub input: String,
    pub variant: Variant,
    pub noise_sigma: Option<f64>,
    pub stage_times: StageTimes,
}

impl RunReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}
