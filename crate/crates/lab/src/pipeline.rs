//! Stage runners and the batch pipeline.
//!
//! Each stage renders its artifacts in memory, writes them with a `.partial`
//! suffix and renames them once the whole stage succeeded. The manifest lists
//! every artifact with its SHA-256 and carries no timestamps, so identical
//! configs give identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ardl_core::ardl::{fit_ardl_ecm, reduce_ardl, select_lags, ForecastMetrics, LagSearchResult};
use ardl_core::bounds::{bounds_test, LevelDecision};
use ardl_core::dgp::synthetic_panel;
use ardl_core::diagnostics::{breusch_pagan, influence_measures, rainbow, run_battery, BatteryEntry, TestResult};
use ardl_core::dlm::{fit_dlm, reduce_model};
use ardl_core::exec::Executor;
use ardl_core::frame::{align_panel, align_pooled, cross_section_mean, describe, AlignedSeriesSet, EstimationSample, IndicatorMap, PanelTable, SummaryStats};
use ardl_core::impute::{impute_panel, ImputationReport};
use ardl_core::ols::{OlsFit, WaldF};
use ardl_core::presets::preset_by_name;
use ardl_core::rollcorr::{screen_pairs, RollCorrResult};
use ardl_core::CoreError;
use serde::Serialize;

use crate::config::{sha256_hex, Model, RunConfig};
use crate::error::{LabError, Result};
use crate::io::{load_panel, write_long_csv, IngestOptions};
use crate::report::fmt_num;

pub const SCHEMA_VERSION: u32 = 1;
pub const STAGES: [&str; 7] = ["ingest", "impute", "rollcorr", "dlm", "ardl", "bounds", "diagnostics"];
pub const MANIFEST: &str = "manifest.json";

/// One file produced by a stage.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("stage output serializes");
        bytes.push(b'\n');
        Self {
            name: name.into(),
            bytes,
        }
    }
}

/// Result for one model inside a stage; failures are kept, not fatal.
#[derive(Debug, Clone, Serialize)]
pub struct ModelEntry<T> {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fails the stage only when every model failed.
fn collect<T>(models: &[Model], outcomes: Vec<std::result::Result<T, CoreError>>) -> Result<Vec<ModelEntry<T>>> {
    let mut first_err = None;
    let mut entries = Vec::new();
    for (m, out) in models.iter().zip(outcomes) {
        match out {
            Ok(r) => entries.push(ModelEntry {
                model: m.name.clone(),
                result: Some(r),
                error: None,
            }),
            Err(e) => {
                entries.push(ModelEntry {
                    model: m.name.clone(),
                    result: None,
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    if entries.iter().all(|e| e.result.is_none()) {
        if let Some(e) = first_err {
            return Err(e.into());
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub nobs: usize,
    pub ncoef: usize,
    pub f_stat: Option<f64>,
    pub f_pvalue: Option<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub sigma2: f64,
    pub aic: f64,
    pub bic: f64,
    pub coefficients: Vec<Coefficient>,
}

impl From<&OlsFit> for FitSummary {
    fn from(fit: &OlsFit) -> Self {
        Self {
            nobs: fit.nobs,
            ncoef: fit.ncoef(),
            f_stat: fit.f_stat,
            f_pvalue: fit.f_pvalue,
            r2: fit.r2,
            adj_r2: fit.adj_r2,
            sigma2: fit.sigma2,
            aic: fit.aic,
            bic: fit.bic,
            coefficients: (0..fit.ncoef())
                .map(|j| Coefficient {
                    label: fit.names[j].clone(),
                    estimate: fit.coef[j],
                    std_error: fit.stderr[j],
                    t_value: fit.t_values[j],
                    p_value: fit.p_values[j],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub source: String,
    pub entities: Vec<String>,
    pub first_year: i32,
    pub last_year: i32,
    pub indicators: Vec<String>,
    pub cells: usize,
    pub missing: usize,
    pub summary: BTreeMap<String, Option<SummaryStats>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RollcorrEntry {
    pub entity: String,
    pub rows: Vec<RollCorrResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DlmEntry {
    pub dependent: String,
    pub regressors: Vec<String>,
    pub q: usize,
    pub full: FitSummary,
    pub reduced: FitSummary,
    pub dropped: Vec<String>,
    pub intercept_only: bool,
    /// Breusch-Pagan on the full model.
    pub homoscedasticity: TestResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArdlEntry {
    pub dependent: String,
    pub regressors: Vec<String>,
    /// Absent when the lags were fixed in the config.
    pub selection: Option<LagSearchResult>,
    pub p: usize,
    pub q: usize,
    pub full: FitSummary,
    pub metrics: ForecastMetrics,
    pub adjustment_speed: f64,
    pub adjustment_t: f64,
    pub adjustment_p: f64,
    pub long_run: Option<Vec<(String, f64)>>,
    pub reduced: FitSummary,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsEntry {
    pub p: usize,
    pub q: usize,
    pub f_stat: f64,
    pub restrictions: usize,
    pub asymptotic_p: f64,
    pub p_value: f64,
    pub replications: usize,
    pub seed: u64,
    pub decisions: Vec<LevelDecision>,
    pub summed: Option<WaldF>,
    pub narrative: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InfluenceSummary {
    pub cook_threshold: f64,
    pub leverage_threshold: f64,
    pub max_cooks_distance: f64,
    /// `(entity, year)` of flagged rows.
    pub flagged: Vec<(String, i32)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsEntry {
    pub p: usize,
    pub q: usize,
    pub tests: Vec<BatteryEntry>,
    pub rainbow: std::result::Result<TestResult, String>,
    pub influence: InfluenceSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub global_seed: u64,
    pub indicator_map_version: u32,
    pub sample: String,
    pub models: Vec<Model>,
    pub stages: Vec<StageRecord>,
    pub notes: Vec<String>,
}

/// Analysis state shared by the stage runners.
pub struct Analysis<'a, E> {
    pub cfg: &'a RunConfig,
    pub models: Vec<Model>,
    pub exec: &'a E,
}

impl<'a, E: Executor> Analysis<'a, E> {
    pub fn new(cfg: &'a RunConfig, exec: &'a E) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            models: cfg.models()?,
            exec,
        })
    }

    /// Reads the configured input or generates the synthetic panel.
    pub fn load(&self) -> Result<(PanelTable, String)> {
        match &self.cfg.input {
            Some(path) => {
                let opts = IngestOptions {
                    range: self.cfg.year_range,
                    unknown_codes: self.cfg.unknown_codes.into(),
                };
                let panel = load_panel(path, &IndicatorMap::builtin(), &opts)?;
                Ok((panel, path.display().to_string()))
            }
            None => {
                let panel = synthetic_panel(&self.cfg.synthetic)?;
                Ok((panel, format!("synthetic (seed {})", self.cfg.synthetic.seed)))
            }
        }
    }

    pub fn ingest(&self, panel: &PanelTable, source: &str) -> Result<Vec<Artifact>> {
        let mut csv = Vec::new();
        write_long_csv(panel, &mut csv).map_err(|e| LabError::Data(e.to_string()))?;
        let summary = IngestSummary {
            source: source.into(),
            entities: panel.entities().to_vec(),
            first_year: panel.years()[0],
            last_year: *panel.years().last().expect("non-empty years"),
            indicators: panel.columns().to_vec(),
            cells: panel.cells().len(),
            missing: panel.missing_count(),
            summary: describe(panel),
        };
        Ok(vec![
            Artifact {
                name: "panel.csv".into(),
                bytes: csv,
            },
            Artifact::json("ingest.json", &summary),
        ])
    }

    pub fn impute(&self, panel: &PanelTable) -> Result<(PanelTable, Vec<Artifact>)> {
        let (out, report) = if self.cfg.impute.enabled {
            let params = self.cfg.impute.params(self.cfg.stage_seed("impute"));
            impute_panel(panel, &params, self.exec)?
        } else {
            let report = ImputationReport {
                mode: "disabled".into(),
                original_missing: panel.missing_count(),
                imputed: BTreeMap::new(),
                left_missing: panel.missing_count(),
                rounds: 0,
                final_change: 0.0,
                converged: true,
                warnings: Vec::new(),
            };
            (panel.clone(), report)
        };
        let mut csv = Vec::new();
        write_long_csv(&out, &mut csv).map_err(|e| LabError::Data(e.to_string()))?;
        Ok((
            out,
            vec![
                Artifact {
                    name: "imputed.csv".into(),
                    bytes: csv,
                },
                Artifact::json("impute.json", &report),
            ],
        ))
    }

    /// The estimation sample: one entity, or all entities pooled.
    pub fn sample(&self, panel: &PanelTable, model: &Model) -> std::result::Result<EstimationSample, CoreError> {
        let regs = model.regressor_refs();
        match &self.cfg.sample.entity {
            Some(e) => align_panel(panel, e, &model.dependent, &regs).map(Into::into),
            None => align_pooled(panel, &model.dependent, &regs),
        }
    }

    fn screen_data(&self, panel: &PanelTable, model: &Model) -> std::result::Result<AlignedSeriesSet, CoreError> {
        let regs = model.regressor_refs();
        match &self.cfg.sample.entity {
            Some(e) => align_panel(panel, e, &model.dependent, &regs),
            None => cross_section_mean(panel, &model.dependent, &regs),
        }
    }

    pub fn rollcorr(&self, panel: &PanelTable) -> Result<Vec<Artifact>> {
        let params = self.cfg.rollcorr.params(self.cfg.stage_seed("rollcorr"));
        let outcomes = self
            .models
            .iter()
            .map(|m| {
                let data = self.screen_data(panel, m)?;
                let rows = screen_pairs(&data, &params, self.exec)?;
                Ok((data, rows))
            })
            .collect();
        let entries = collect(&self.models, outcomes)?;
        let mut files = Vec::new();
        for entry in &entries {
            if let Some((data, rows)) = &entry.result {
                files.push(Artifact {
                    name: format!("rollcorr_{}.csv", entry.model),
                    bytes: rollcorr_table(rows)?,
                });
                files.push(Artifact {
                    name: format!("rollcorr_{}_sequences.csv", entry.model),
                    bytes: rollcorr_sequences(data.years(), rows)?,
                });
            }
        }
        let json: Vec<ModelEntry<RollcorrEntry>> = entries
            .into_iter()
            .map(|e| ModelEntry {
                model: e.model,
                error: e.error,
                result: e.result.map(|(data, rows)| RollcorrEntry {
                    entity: data.entity().into(),
                    rows,
                }),
            })
            .collect();
        files.insert(0, Artifact::json("rollcorr.json", &json));
        Ok(files)
    }

    pub fn dlm(&self, panel: &PanelTable) -> Result<Vec<Artifact>> {
        let dcfg = &self.cfg.dlm;
        let spec = dcfg.spec(self.cfg.sample.entity_effects);
        let outcomes = self
            .models
            .iter()
            .map(|m| {
                let sample = self.sample(panel, m)?;
                let full = fit_dlm(&sample, &spec)?;
                let reduced = reduce_model(&full, dcfg.alpha, dcfg.drop_mode())?;
                let bp = breusch_pagan(full.design(), &full.fit, self.cfg.diagnostics.bp_form)?;
                Ok(DlmEntry {
                    dependent: m.dependent.clone(),
                    regressors: m.regressors.clone(),
                    q: dcfg.q,
                    full: (&full.fit).into(),
                    reduced: (&reduced.fit).into(),
                    dropped: reduced.dropped.clone(),
                    intercept_only: reduced.intercept_only,
                    homoscedasticity: bp,
                })
            })
            .collect();
        Ok(vec![Artifact::json("dlm.json", &collect(&self.models, outcomes)?)])
    }

    /// Lag search, full fit and reduced fit. Returns the selected lags per
    /// model alongside the artifacts.
    pub fn ardl(&self, panel: &PanelTable) -> Result<(BTreeMap<String, (usize, usize)>, Vec<Artifact>)> {
        let acfg = &self.cfg.ardl;
        let template = acfg.template(self.cfg.sample.entity_effects);
        let outcomes = self
            .models
            .iter()
            .map(|m| {
                let sample = self.sample(panel, m)?;
                let selection = match acfg.lags {
                    Some(_) => None,
                    None => Some(select_lags(&sample, &template, acfg.p_max, acfg.q_max, acfg.criterion, self.exec)?),
                };
                let (p, q) = acfg.lags.or(selection.as_ref().map(|s| s.selected)).expect("lags fixed or selected");
                let spec = ardl_core::ardl::ArdlSpec { p, q, ..template.clone() };
                let fit = fit_ardl_ecm(&sample, &spec)?;
                let reduced = reduce_ardl(&fit, acfg.alpha)?;
                Ok(ArdlEntry {
                    dependent: m.dependent.clone(),
                    regressors: m.regressors.clone(),
                    p,
                    q,
                    full: (&fit.fit).into(),
                    metrics: fit.metrics,
                    adjustment_speed: fit.adjustment_speed,
                    adjustment_t: fit.adjustment_t,
                    adjustment_p: fit.adjustment_p,
                    long_run: fit.long_run.clone(),
                    reduced: (&reduced.fit).into(),
                    dropped: reduced.dropped,
                    selection,
                })
            })
            .collect();
        let entries = collect(&self.models, outcomes)?;
        let lags = entries
            .iter()
            .filter_map(|e| e.result.as_ref().map(|r| (e.model.clone(), (r.p, r.q))))
            .collect();
        Ok((lags, vec![Artifact::json("ardl.json", &entries)]))
    }

    /// Lags for the bounds test and diagnostics: fixed in the config, else
    /// the selected ones.
    fn test_lags(&self, model: &Model, selected: &BTreeMap<String, (usize, usize)>) -> std::result::Result<(usize, usize), CoreError> {
        if let Some(l) = self.cfg.ardl.test_lags {
            return Ok(l);
        }
        selected
            .get(&model.name)
            .copied()
            .ok_or_else(|| CoreError::Undefined(format!("no selected lags for {}", model.name)))
    }

    fn test_spec(&self, model: &Model, selected: &BTreeMap<String, (usize, usize)>) -> std::result::Result<ardl_core::ardl::ArdlSpec, CoreError> {
        let (p, q) = self.test_lags(model, selected)?;
        Ok(ardl_core::ardl::ArdlSpec {
            p,
            q,
            ..self.cfg.ardl.template(self.cfg.sample.entity_effects)
        })
    }

    pub fn bounds(&self, panel: &PanelTable, selected: &BTreeMap<String, (usize, usize)>) -> Result<Vec<Artifact>> {
        let stage_seed = self.cfg.stage_seed("bounds");
        let outcomes = self
            .models
            .iter()
            .map(|m| {
                let sample = self.sample(panel, m)?;
                let spec = self.test_spec(m, selected)?;
                let params = self.cfg.bounds.params(ardl_core::rng::derive_seed(stage_seed, &m.name));
                let r = bounds_test(&sample, &spec, &params, self.exec)?;
                Ok((spec.p, spec.q, r))
            })
            .collect();
        let entries = collect(&self.models, outcomes)?;
        let mut files = Vec::new();
        let mut json = Vec::new();
        for e in entries {
            let result = e.result.map(|(p, q, r)| {
                if self.cfg.bounds.dump_sample {
                    let mut text = String::from("replication,f_stat\n");
                    for (b, f) in r.bootstrap_sample.iter().enumerate() {
                        text.push_str(&format!("{},{}\n", b + 1, fmt_num(Some(*f))));
                    }
                    files.push(Artifact {
                        name: format!("bounds_{}_sample.csv", e.model),
                        bytes: text.into_bytes(),
                    });
                }
                BoundsEntry {
                    p,
                    q,
                    f_stat: r.f_stat,
                    restrictions: r.restrictions,
                    asymptotic_p: r.asymptotic_p,
                    p_value: r.p_value,
                    replications: r.replications,
                    seed: r.seed,
                    decisions: r.decisions,
                    summed: r.summed,
                    narrative: r.narrative,
                }
            });
            json.push(ModelEntry {
                model: e.model,
                result,
                error: e.error,
            });
        }
        files.insert(0, Artifact::json("bounds.json", &json));
        Ok(files)
    }

    pub fn diagnostics(&self, panel: &PanelTable, selected: &BTreeMap<String, (usize, usize)>) -> Result<Vec<Artifact>> {
        let stage_seed = self.cfg.stage_seed("diagnostics");
        let outcomes = self
            .models
            .iter()
            .map(|m| {
                let sample = self.sample(panel, m)?;
                let spec = self.test_spec(m, selected)?;
                let params = self
                    .cfg
                    .diagnostics
                    .params(&self.cfg.bounds, ardl_core::rng::derive_seed(stage_seed, &m.name));
                let battery = run_battery(&sample, &spec, &params, self.exec)?;
                let fit = fit_ardl_ecm(&sample, &spec)?;
                let x = &fit.stacked.design;
                let rb = rainbow(x, &fit.stacked.response, None, 0.5).map_err(|e| e.to_string());
                let inf = influence_measures(&fit.fit, None, None);
                let influence = InfluenceSummary {
                        cook_threshold: inf.cook_threshold,
                        leverage_threshold: inf.leverage_threshold,
                        max_cooks_distance: inf.cooks_distance.iter().copied().fold(0.0, f64::max),
                        flagged: inf
                            .flagged
                            .iter()
                            .map(|&i| {
                                let (seg, _) = fit.stacked.rows[i];
                                (sample.segments()[seg].entity().to_string(), fit.stacked.row_years[i])
                            })
                            .collect(),
                };
                Ok(DiagnosticsEntry {
                    p: spec.p,
                    q: spec.q,
                    tests: battery.entries,
                    rainbow: rb,
                    influence,
                })
            })
            .collect();
        Ok(vec![Artifact::json("diagnostics.json", &collect(&self.models, outcomes)?)])
    }

    /// Notes recorded in the manifest and the report.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        for m in &self.models {
            if let Ok(p) = preset_by_name(&m.name) {
                notes.extend(p.discrepancies());
            }
        }
        notes.push(
            "Rolling-correlation tables number their pairs in preset regressor order (pair 1 = first regressor)."
                .into(),
        );
        notes.push(match &self.cfg.sample.entity {
            Some(e) => format!("Estimation on entity {e} only."),
            None if self.cfg.sample.entity_effects => "Pooled estimation over all entities with entity dummies.".into(),
            None => "Pooled estimation over all entities; rolling correlations use the cross-entity mean.".into(),
        });
        notes
    }

    pub fn sample_label(&self) -> String {
        match &self.cfg.sample.entity {
            Some(e) => format!("entity:{e}"),
            None if self.cfg.sample.entity_effects => "pooled+entity_effects".into(),
            None => "pooled".into(),
        }
    }
}

fn rollcorr_table(rows: &[RollCorrResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| LabError::Data(e.to_string());
    w.write_record(crate::report::ROLLCORR_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            format!("{} vs {}", r.dependent, r.regressor),
            r.width.to_string(),
            fmt_num(Some(r.sd_rolcor)),
            fmt_num(Some(r.band_95)),
            fmt_num(Some(r.band_05)),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| LabError::Data(e.to_string()))
}

/// Plot-ready rolling sequences; `year` is the last year of each window.
fn rollcorr_sequences(years: &[i32], rows: &[RollCorrResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| LabError::Data(e.to_string());
    w.write_record(["regressor", "width", "year", "correlation"]).map_err(err)?;
    for r in rows {
        for (i, c) in r.correlations.iter().enumerate() {
            w.write_record([
                r.regressor.clone(),
                r.width.to_string(),
                years[i + r.width - 1].to_string(),
                fmt_num(*c),
            ])
            .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| LabError::Data(e.to_string()))
}

/// Writes a stage's artifacts as `.partial` files and renames them once all
/// are on disk.
pub fn commit_artifacts(dir: &Path, files: &[Artifact]) -> Result<Vec<ArtifactRecord>> {
    let mut staged = Vec::new();
    for f in files {
        let partial = dir.join(format!("{}.partial", f.name));
        fs::write(&partial, &f.bytes).map_err(|e| LabError::io(&partial, e))?;
        staged.push(partial);
    }
    let mut records = Vec::new();
    for (f, partial) in files.iter().zip(staged) {
        let fin = dir.join(&f.name);
        fs::rename(&partial, &fin).map_err(|e| LabError::io(&fin, e))?;
        records.push(ArtifactRecord {
            file: f.name.clone(),
            sha256: sha256_hex(&f.bytes),
        });
    }
    Ok(records)
}

fn write_failure(dir: &Path, stage: &str, err: &LabError) {
    let body = serde_json::json!({ "stage": stage, "error": err.to_string() });
    let _ = fs::write(
        dir.join(format!("{stage}.json.partial")),
        serde_json::to_vec_pretty(&body).unwrap_or_default(),
    );
}

/// Console sink for stage-tagged progress lines.
pub type Log<'a> = &'a dyn Fn(&str, &str);

/// Runs all seven stages into `out` and writes the manifest.
pub fn run_pipeline<E: Executor>(cfg: &RunConfig, out: &Path, exec: &E, log: Log<'_>) -> Result<Manifest> {
    let analysis = Analysis::new(cfg, exec)?;
    if let Some(input) = &cfg.input {
        if !input.is_file() {
            return Err(LabError::io(
                input,
                std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
            ));
        }
    }
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;

    let mut stages = Vec::new();
    let mut run = |name: &'static str, seed: Option<u64>, f: &mut dyn FnMut() -> Result<Vec<Artifact>>| -> Result<()> {
        log(name, "start");
        match f() {
            Ok(files) => {
                let artifacts = commit_artifacts(out, &files)?;
                log(name, &format!("done ({} artifacts)", artifacts.len()));
                stages.push(StageRecord {
                    name: name.into(),
                    seed,
                    artifacts,
                });
                Ok(())
            }
            Err(e) => {
                write_failure(out, name, &e);
                log(name, &format!("failed: {e}"));
                Err(e.in_stage(name))
            }
        }
    };

    let mut loaded: Option<PanelTable> = None;
    run("ingest", None, &mut || {
        let (panel, source) = analysis.load()?;
        let files = analysis.ingest(&panel, &source)?;
        loaded = Some(panel);
        Ok(files)
    })?;
    let raw = loaded.take().expect("ingest produced a panel");

    let mut imputed: Option<PanelTable> = None;
    run("impute", Some(cfg.stage_seed("impute")), &mut || {
        let (panel, files) = analysis.impute(&raw)?;
        imputed = Some(panel);
        Ok(files)
    })?;
    let panel = imputed.take().expect("impute produced a panel");

    run("rollcorr", Some(cfg.stage_seed("rollcorr")), &mut || analysis.rollcorr(&panel))?;
    run("dlm", None, &mut || analysis.dlm(&panel))?;
    let mut selected = BTreeMap::new();
    run("ardl", None, &mut || {
        let (lags, files) = analysis.ardl(&panel)?;
        selected = lags;
        Ok(files)
    })?;
    run("bounds", Some(cfg.stage_seed("bounds")), &mut || analysis.bounds(&panel, &selected))?;
    run("diagnostics", Some(cfg.stage_seed("diagnostics")), &mut || {
        analysis.diagnostics(&panel, &selected)
    })?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: cfg.sha256(),
        global_seed: cfg.seed,
        indicator_map_version: IndicatorMap::builtin().version(),
        sample: analysis.sample_label(),
        models: analysis.models.clone(),
        stages,
        notes: analysis.notes(),
    };
    commit_artifacts(
        out,
        &[
            Artifact::json("config.json", cfg),
            Artifact::json(MANIFEST, &manifest),
        ],
    )?;
    Ok(manifest)
}

/// Runs one stage on its own (the single-stage subcommands).
pub fn run_single<E: Executor>(
    cfg: &RunConfig,
    stage: &'static str,
    out: &Path,
    exec: &E,
    log: Log<'_>,
) -> Result<Vec<PathBuf>> {
    let analysis = Analysis::new(cfg, exec)?;
    let (panel, source) = analysis.load()?;
    log(stage, "start");
    let files = (|| -> Result<Vec<Artifact>> {
        match stage {
            "ingest" => analysis.ingest(&panel, &source),
            "impute" => analysis.impute(&panel).map(|(_, f)| f),
            "rollcorr" => analysis.rollcorr(&panel),
            "dlm" => analysis.dlm(&panel),
            "ardl" => analysis.ardl(&panel).map(|(_, f)| f),
            "bounds" | "diagnostics" => {
                let selected = if cfg.ardl.test_lags.is_some() {
                    BTreeMap::new()
                } else {
                    analysis.ardl(&panel)?.0
                };
                if stage == "bounds" {
                    analysis.bounds(&panel, &selected)
                } else {
                    analysis.diagnostics(&panel, &selected)
                }
            }
            other => Err(LabError::Config(format!("unknown stage `{other}`"))),
        }
    })()
    .map_err(|e| e.in_stage(stage))?;
    fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let records = commit_artifacts(out, &files)?;
    log(stage, &format!("done ({} artifacts)", records.len()));
    Ok(records.into_iter().map(|r| out.join(r.file)).collect())
}
