//! JSON run configuration. Every block has defaults, so `{}` is a valid
//! config that runs all four research questions on the synthetic panel.

use std::path::{Path, PathBuf};

use ardl_core::ardl::{ArdlSpec, Criterion};
use ardl_core::bounds::BootstrapParams;
use ardl_core::dgp::SyntheticPanelSpec;
use ardl_core::diagnostics::{BatteryParams, BreuschPaganForm};
use ardl_core::dlm::{DlmSpec, DropMode};
use ardl_core::forest::ForestParams;
use ardl_core::frame::{UnknownCodePolicy, YearRange};
use ardl_core::presets::{all_presets, preset_by_name};
use ardl_core::rng::derive_seed;
use ardl_core::rollcorr::ScreenParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

pub const SEED_ENV: &str = "ARDLLAB_SEED";
pub const DEFAULT_SEED: u64 = 20_240_607;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Panel file (long CSV or World Bank wide). Without it the synthetic
    /// panel is generated.
    pub input: Option<PathBuf>,
    pub synthetic: SyntheticPanelSpec,
    pub year_range: Option<YearRange>,
    pub unknown_codes: CodePolicy,
    pub seed: u64,
    /// Preset names (RQ1..RQ4).
    pub research_questions: Vec<String>,
    /// Extra models next to the presets.
    pub custom: Vec<ModelDef>,
    pub sample: SampleConfig,
    pub impute: ImputeConfig,
    pub rollcorr: RollcorrConfig,
    pub dlm: DlmConfig,
    pub ardl: ArdlConfig,
    pub bounds: BoundsConfig,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            synthetic: SyntheticPanelSpec::default(),
            year_range: None,
            unknown_codes: CodePolicy::Reject,
            seed: DEFAULT_SEED,
            research_questions: all_presets().into_iter().map(|p| p.name).collect(),
            custom: Vec::new(),
            sample: SampleConfig::default(),
            impute: ImputeConfig::default(),
            rollcorr: RollcorrConfig::default(),
            dlm: DlmConfig::default(),
            ardl: ArdlConfig::default(),
            bounds: BoundsConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodePolicy {
    #[default]
    Reject,
    PassThrough,
}

impl From<CodePolicy> for UnknownCodePolicy {
    fn from(p: CodePolicy) -> Self {
        match p {
            CodePolicy::Reject => UnknownCodePolicy::Reject,
            CodePolicy::PassThrough => UnknownCodePolicy::PassThrough,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDef {
    pub name: String,
    pub dependent: String,
    pub regressors: Vec<String>,
}

/// Pool all entities into one stacked regression, or fit one entity.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Country code; `None` pools every entity.
    pub entity: Option<String>,
    /// Entity dummies in pooled fits.
    pub entity_effects: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputeConfig {
    pub enabled: bool,
    pub trees: usize,
    pub min_leaf: usize,
    pub max_rounds: usize,
    pub tol: f64,
    pub pooled: bool,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        let f = ForestParams::default();
        Self {
            enabled: true,
            trees: f.trees,
            min_leaf: f.min_leaf,
            max_rounds: f.max_rounds,
            tol: f.tol,
            pooled: f.pooled,
        }
    }
}

impl ImputeConfig {
    pub fn params(&self, seed: u64) -> ForestParams {
        ForestParams {
            trees: self.trees,
            min_leaf: self.min_leaf,
            max_rounds: self.max_rounds,
            tol: self.tol,
            seed,
            pooled: self.pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollcorrConfig {
    pub widths: Vec<usize>,
    pub replications: usize,
    pub permutation: bool,
}

impl Default for RollcorrConfig {
    fn default() -> Self {
        let s = ScreenParams::default();
        Self {
            widths: s.widths,
            replications: s.replications,
            permutation: s.permutation,
        }
    }
}

impl RollcorrConfig {
    pub fn params(&self, seed: u64) -> ScreenParams {
        ScreenParams {
            widths: self.widths.clone(),
            replications: self.replications,
            seed,
            permutation: self.permutation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DlmConfig {
    pub q: usize,
    pub alpha: f64,
    pub drop_whole_series: bool,
}

impl Default for DlmConfig {
    fn default() -> Self {
        Self {
            q: 2,
            alpha: 0.05,
            drop_whole_series: false,
        }
    }
}

impl DlmConfig {
    pub fn spec(&self, entity_effects: bool) -> DlmSpec {
        DlmSpec {
            entity_effects,
            ..DlmSpec::uniform(self.q)
        }
    }

    pub fn drop_mode(&self) -> DropMode {
        if self.drop_whole_series {
            DropMode::WholeSeries
        } else {
            DropMode::Term
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArdlConfig {
    pub p_max: usize,
    pub q_max: usize,
    pub criterion: Criterion,
    pub contemporaneous: bool,
    pub trend: bool,
    /// Significance level for the reduced model.
    pub alpha: f64,
    /// Fixed `[p, q]` for the ARDL stage, skipping the lag search.
    pub lags: Option<(usize, usize)>,
    /// Fixed `[p, q]` for the bounds test and diagnostics. Without it they
    /// use the selected lags.
    pub test_lags: Option<(usize, usize)>,
}

impl Default for ArdlConfig {
    fn default() -> Self {
        Self {
            p_max: 5,
            q_max: 1,
            criterion: Criterion::Aic,
            contemporaneous: false,
            trend: false,
            alpha: 0.05,
            lags: None,
            test_lags: None,
        }
    }
}

impl ArdlConfig {
    pub fn template(&self, entity_effects: bool) -> ArdlSpec {
        ArdlSpec {
            contemporaneous: self.contemporaneous,
            trend: self.trend,
            entity_effects,
            ..ArdlSpec::new(1, 0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub replications: usize,
    pub levels: Vec<f64>,
    pub summed_form: bool,
    /// Write the bootstrap F sample to CSV.
    pub dump_sample: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let b = BootstrapParams::default();
        Self {
            replications: b.replications,
            levels: b.levels,
            summed_form: b.summed_form,
            dump_sample: false,
        }
    }
}

impl BoundsConfig {
    pub fn params(&self, seed: u64) -> BootstrapParams {
        BootstrapParams {
            replications: self.replications,
            seed,
            levels: self.levels.clone(),
            summed_form: self.summed_form,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub bg_lags: usize,
    pub lb_lags: Option<usize>,
    pub bp_form: BreuschPaganForm,
    pub reset_powers: Vec<u32>,
    /// Bootstrap size for the PSS entry of the battery.
    pub replications: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        let b = BatteryParams::default();
        Self {
            bg_lags: b.bg_lags,
            lb_lags: b.lb_lags,
            bp_form: b.bp_form,
            reset_powers: b.reset_powers,
            replications: b.bootstrap.replications,
        }
    }
}

impl DiagnosticsConfig {
    pub fn params(&self, bounds: &BoundsConfig, seed: u64) -> BatteryParams {
        BatteryParams {
            bg_lags: self.bg_lags,
            lb_lags: self.lb_lags,
            bp_form: self.bp_form,
            reset_powers: self.reset_powers.clone(),
            bootstrap: BootstrapParams {
                replications: self.replications,
                ..bounds.params(seed)
            },
        }
    }
}

/// A resolved model: a preset or a custom definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Model {
    pub name: String,
    pub dependent: String,
    pub regressors: Vec<String>,
}

impl Model {
    pub fn regressor_refs(&self) -> Vec<&str> {
        self.regressors.iter().map(String::as_str).collect()
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        // Relative input paths are relative to the config file.
        if let (Some(input), Some(dir)) = (&cfg.input, path.parent()) {
            if input.is_relative() {
                cfg.input = Some(dir.join(input));
            }
        }
        Ok(cfg)
    }

    /// Seed precedence: `--seed` over `ARDLLAB_SEED` over the config file.
    pub fn apply_seed(&mut self, cli: Option<u64>, env: Option<&str>) -> Result<()> {
        if let Some(raw) = env.filter(|s| !s.trim().is_empty()) {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| LabError::Config(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")))?;
        }
        if let Some(seed) = cli {
            self.seed = seed;
        }
        Ok(())
    }

    /// Seed of a named stage, derived from the global seed.
    pub fn stage_seed(&self, stage: &str) -> u64 {
        derive_seed(self.seed, stage)
    }

    pub fn models(&self) -> Result<Vec<Model>> {
        let mut out = Vec::new();
        for name in &self.research_questions {
            let p = preset_by_name(name).map_err(|e| LabError::Config(e.to_string()))?;
            out.push(Model {
                name: p.name,
                dependent: p.dependent,
                regressors: p.regressors,
            });
        }
        for m in &self.custom {
            out.push(Model {
                name: m.name.clone(),
                dependent: m.dependent.clone(),
                regressors: m.regressors.clone(),
            });
        }
        let mut names: Vec<&str> = out.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(LabError::Config("model names must be unique".into()));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: ardl_core::CoreError| LabError::Config(e.to_string());
        if self.models()?.is_empty() {
            return Err(LabError::Config("no research questions or custom models".into()));
        }
        for m in &self.custom {
            if m.regressors.is_empty() {
                return Err(LabError::Config(format!("model {} has no regressors", m.name)));
            }
        }
        if let Some(r) = self.year_range {
            if r.first > r.last {
                return Err(LabError::Config("year_range.first is after year_range.last".into()));
            }
        }
        self.impute.params(0).validate().map_err(cfg)?;
        if self.rollcorr.widths.is_empty() || self.rollcorr.widths.iter().any(|&w| w < 2) {
            return Err(LabError::Config("rollcorr widths must be at least 2".into()));
        }
        if self.rollcorr.replications < ardl_core::rollcorr::MIN_BAND_REPLICATIONS {
            return Err(LabError::Config(format!(
                "rollcorr replications must be at least {}",
                ardl_core::rollcorr::MIN_BAND_REPLICATIONS
            )));
        }
        if !(self.dlm.alpha > 0.0 && self.dlm.alpha <= 1.0) || !(self.ardl.alpha > 0.0 && self.ardl.alpha <= 1.0) {
            return Err(LabError::Config("alpha must lie in (0, 1]".into()));
        }
        if self.ardl.p_max == 0 {
            return Err(LabError::Config("ardl.p_max must be at least 1".into()));
        }
        if [self.ardl.lags, self.ardl.test_lags].iter().flatten().any(|(p, _)| *p == 0) {
            return Err(LabError::Config("ARDL lag order p must be at least 1".into()));
        }
        self.bounds.params(0).validate().map_err(cfg)?;
        self.diagnostics.params(&self.bounds, 0).bootstrap.validate().map_err(cfg)?;
        if self.diagnostics.bg_lags == 0 {
            return Err(LabError::Config("diagnostics.bg_lags must be at least 1".into()));
        }
        if self.input.is_none() {
            self.synthetic.validate().map_err(cfg)?;
        }
        Ok(())
    }

    /// Canonical JSON of the effective configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.canonical_json().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
