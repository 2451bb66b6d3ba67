//! Run configuration: one JSON document, every field defaulted, the resolved
//! form echoed into the manifest so no hidden defaults exist.

use serde::{Deserialize, Serialize};
use ymqm_core::eigen::{EigenRequest, SolveMode};
use ymqm_core::model::ModelSpec;
use ymqm_core::spectrum::{AnalysisOptions, ClassifyOptions, FitRegion};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub analysis: AnalysisConfig,
    pub fit: FitConfig,
    pub equilibration: EquilibrationConfig,
    pub oracle: OracleConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub h0: usize,
    pub l0: usize,
    pub scale: f64,
    /// Defaults to 2*h0 + 8 when absent.
    pub quad_order: Option<usize>,
    pub max_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            h0: 16,
            l0: 24,
            scale: 1.0,
            quad_order: None,
            max_dim: ymqm_core::model::DEFAULT_DIMENSION_BUDGET,
        }
    }
}

impl ModelConfig {
    pub fn to_spec(&self) -> ModelSpec {
        let mut spec = ModelSpec::new(self.h0, self.l0);
        spec.radial.scale = self.scale;
        if let Some(q) = self.quad_order {
            spec.radial.quad_order = q;
        }
        spec.max_dim = self.max_dim;
        spec
    }

    pub fn spec_for(&self, h0: usize, l0: usize) -> ModelSpec {
        let mut spec = ModelSpec::new(h0, l0);
        spec.radial.scale = self.scale;
        spec.max_dim = self.max_dim;
        spec
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SolverModeConfig {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: SolverModeConfig,
    pub seed: u64,
    pub dense_threshold: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 40,
            tol: 1e-5,
            max_iter: 3000,
            mode: SolverModeConfig::Auto,
            seed: 1,
            dense_threshold: ymqm_core::eigen::DEFAULT_DENSE_THRESHOLD,
        }
    }
}

impl SolverConfig {
    pub fn to_request(&self) -> EigenRequest {
        EigenRequest {
            k: self.k,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            mode: match self.mode {
                SolverModeConfig::Auto => SolveMode::Auto,
                SolverModeConfig::Dense => SolveMode::Dense,
                SolverModeConfig::Lanczos => SolveMode::Lanczos,
            },
            dense_threshold: self.dense_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Nested truncation levels [h0, l0]; the last level is the production
    /// solve. Empty means: solve the model spec directly, no sweep.
    pub levels: Vec<[usize; 2]>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            levels: vec![[12, 16], [16, 24]],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Energy clustering width (units of H) for charge classification.
    pub cluster_tol: f64,
    /// Charge-quality level above which a record is flagged inconsistent.
    pub reject_threshold: f64,
    /// +-q pairing tolerance = this factor times solver tol / 4.
    pub pair_tol_factor: f64,
    /// Relative gap threshold for near-degenerate pair detection.
    pub rel_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-6,
            reject_threshold: 0.2,
            pair_tol_factor: 10.0,
            rel_threshold: 0.05,
        }
    }
}

impl AnalysisConfig {
    pub fn to_options(&self, solver_tol: f64) -> AnalysisOptions {
        AnalysisOptions {
            classify: ClassifyOptions {
                cluster_tol: self.cluster_tol,
                reject_threshold: self.reject_threshold,
            },
            pair_tol: self.pair_tol_factor * solver_tol / 4.0,
            rel_threshold: self.rel_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub q_min: u32,
    pub q_max: u32,
    pub n_max: u32,
    /// Per-sector overrides [q, n_max].
    pub per_q_n_max: Vec<[u32; 2]>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            q_min: 0,
            q_max: 10,
            n_max: 3,
            per_q_n_max: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn to_region(&self) -> FitRegion {
        let mut region = FitRegion::new(self.q_min, self.q_max, self.n_max);
        region.per_q_n_max = self
            .per_q_n_max
            .iter()
            .map(|[q, n]| (*q, *n))
            .collect();
        region
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibrationConfig {
    /// Micro-canonical window: sector and energy interval (units of H).
    pub q_abs: u32,
    pub window_e_min: f64,
    pub window_delta: f64,
    /// Haar Monte Carlo.
    pub haar_dims: Vec<usize>,
    pub haar_samples: usize,
    /// Observable check sampling.
    pub time_samples: usize,
    pub horizon_over_min_gap: f64,
    pub finite_t_slack: f64,
    /// Gap-bound audit floor (units of H).
    pub gap_floor: f64,
    /// Dense subsystem check (skipped when the instance exceeds the dense
    /// threshold).
    pub subsystem: SubsystemConfig,
}

impl Default for EquilibrationConfig {
    fn default() -> Self {
        Self {
            q_abs: 2,
            window_e_min: 1.5,
            window_delta: 2.5,
            haar_dims: vec![2, 4, 8, 16],
            haar_samples: 100_000,
            time_samples: 10_000,
            horizon_over_min_gap: 1e4,
            finite_t_slack: 0.1,
            gap_floor: 1.5,
            subsystem: SubsystemConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsystemConfig {
    pub enabled: bool,
    pub h0: usize,
    pub l0: usize,
    /// Initial state: uniform superposition over this eigenlevel range.
    pub level_start: usize,
    pub level_count: usize,
    pub horizon_over_min_gap: f64,
    pub time_samples: usize,
}

impl Default for SubsystemConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            h0: 4,
            l0: 4,
            level_start: 20,
            level_count: 12,
            horizon_over_min_gap: 1e3,
            time_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub cutoffs: Vec<u32>,
    pub k: usize,
    /// Reduced-model truncation for the comparison.
    pub reduced_h0: usize,
    pub reduced_l0: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            cutoffs: vec![4, 6, 8],
            k: 5,
            reduced_h0: 16,
            reduced_l0: 24,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub store_eigenvectors: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            store_eigenvectors: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
    }
}
