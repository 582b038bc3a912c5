//! JSON documents written by the subcommands. Every report echoes the
//! defaults it was produced with.

use serde::{Deserialize, Serialize};

use cellscape::defaults::{Defaults, DEFAULTS_ENV};
use cellscape::matching::MetricReport;
use cellscape::synthesis::{ObjectiveValue, SynthesisConfig};
use cellscape::topology::{
    DensityScope, DiagramConfig, DiagramFeature, EnrichedPersistenceDiagram, PersistenceBuckets,
};
use cellscape::CellLayout;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: "cellscape".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultsEcho {
    /// `builtin`, or the path named by the defaults environment variable.
    pub source: String,
    pub values: Defaults,
}

impl DefaultsEcho {
    pub fn load() -> CliResult<Self> {
        let source = match std::env::var_os(DEFAULTS_ENV) {
            Some(p) if !p.is_empty() => p.to_string_lossy().into_owned(),
            _ => "builtin".into(),
        };
        let values = Defaults::load().map_err(|e| {
            CliError::from(e).with_context(&format!("loading defaults from {source}"))
        })?;
        Ok(Self { source, values })
    }
}

impl CliError {
    fn with_context(mut self, ctx: &str) -> Self {
        self.message = format!("{ctx}: {}", self.message);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub radii: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub h: f64,
    pub persistence_floor: f64,
    pub density_scope: DensityScope,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub buckets: Option<Vec<f64>>,
}

impl Parameters {
    pub fn new(cfg: &DiagramConfig, buckets: Option<&PersistenceBuckets>) -> Self {
        Self {
            radii: cfg.radii.values().to_vec(),
            sigmas: cfg.sigmas.values().to_vec(),
            h: cfg.h,
            persistence_floor: cfg.floor(),
            density_scope: cfg.density_scope,
            buckets: buckets.map(|b| b.edges().to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleJson {
    pub birth: f64,
    pub death: f64,
    pub persistence: f64,
    pub center: [f64; 2],
    pub k_vec: Vec<f64>,
    pub density_vec: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramJson {
    /// `None` for the all-cells diagram.
    pub class_id: Option<usize>,
    pub class_name: Option<String>,
    pub k_arity: usize,
    pub density_arity: usize,
    pub holes: Vec<HoleJson>,
}

impl DiagramJson {
    pub fn new(d: &EnrichedPersistenceDiagram, layout: &CellLayout) -> Self {
        Self {
            class_id: d.class_id,
            class_name: d.class_id.map(|c| layout.class_names()[c].clone()),
            k_arity: d.k_arity,
            density_arity: d.density_arity,
            holes: d
                .points
                .iter()
                .map(|p| HoleJson {
                    birth: p.birth,
                    death: p.death,
                    persistence: p.persistence(),
                    center: [p.center.x, p.center.y],
                    k_vec: p.k_vec.clone(),
                    density_vec: p.density_vec.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossKEntry {
    pub source: usize,
    pub target: usize,
    pub values: Vec<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureJson {
    pub class_id: Option<usize>,
    pub class_name: Option<String>,
    pub log_histogram: Vec<f64>,
}

impl FeatureJson {
    pub fn new(f: &DiagramFeature, layout: &CellLayout) -> Self {
        Self {
            class_id: f.class_id,
            class_name: f.class_id.map(|c| layout.class_names()[c].clone()),
            log_histogram: f.log_histogram.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub tool: ToolInfo,
    pub defaults: DefaultsEcho,
    pub parameters: Parameters,
    pub domain: [f64; 4],
    pub classes: Vec<String>,
    pub class_counts: Vec<usize>,
    pub diagrams: Vec<DiagramJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub union_diagram: Option<DiagramJson>,
    pub cross_k: Vec<CrossKEntry>,
    pub features: Vec<FeatureJson>,
}

/// The part of an analyze report that `render` reads.
#[derive(Debug, Clone, Deserialize)]
pub struct DiagramFile {
    pub diagrams: Vec<DiagramJson>,
    #[serde(default)]
    pub union_diagram: Option<DiagramJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub tool: ToolInfo,
    pub defaults: DefaultsEcho,
    pub parameters: Parameters,
    pub classes: Vec<String>,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorizeReport {
    pub tool: ToolInfo,
    pub defaults: DefaultsEcho,
    pub parameters: Parameters,
    pub features: Vec<FeatureJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub union_feature: Option<FeatureJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub tool: ToolInfo,
    pub defaults: DefaultsEcho,
    pub config: SynthesisConfig,
    /// Descriptors used by the objective during optimization.
    pub objective_parameters: Parameters,
    /// Descriptors used for the final metrics.
    pub report_parameters: Parameters,
    pub lambda_cc: f64,
    pub lambda_k: f64,
    pub initial_objective: ObjectiveValue,
    pub best_objective: ObjectiveValue,
    pub accepted_steps: usize,
    pub cells_before_overlap_removal: usize,
    pub cells: usize,
    pub metrics: MetricReport,
    pub init_metrics: MetricReport,
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::internal(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}
