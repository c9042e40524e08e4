//! ARDL models in error-correction form: design construction, estimation,
//! long-run coefficients, lag-order search and in-sample forecast accuracy.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dlm::{backward_eliminate, DropMode, Elimination};
use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::frame::EstimationSample;
use crate::ols::{ols_fit, OlsFit};
use crate::terms::{self, Response, StackedDesign, Term};

/// `|lambda_1|` at or below this leaves the long run undefined.
pub const LAMBDA_TOL: f64 = 1e-10;

/// Relative scale under which a naive forecast error is treated as zero in
/// GMRAE.
pub const GMRAE_EPS: f64 = 1e-12;

/// Lag structure of an error-correction model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArdlSpec {
    /// Number of lagged differences of the dependent series.
    pub p: usize,
    /// Number of lagged differences of each regressor.
    pub q: usize,
    /// Per-regressor difference lags overriding `q`.
    #[serde(default)]
    pub per_regressor_q: Option<Vec<usize>>,
    #[serde(default = "default_true")]
    pub include_intercept: bool,
    #[serde(default)]
    pub trend: bool,
    /// Adds the current difference of every regressor.
    #[serde(default)]
    pub contemporaneous: bool,
    /// Entity dummies for pooled samples.
    #[serde(default)]
    pub entity_effects: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ArdlSpec {
    fn default() -> Self {
        Self {
            p: 1,
            q: 1,
            per_regressor_q: None,
            include_intercept: true,
            trend: false,
            contemporaneous: false,
            entity_effects: false,
        }
    }
}

impl ArdlSpec {
    pub fn new(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            ..Self::default()
        }
    }

    pub fn validate(&self, nregressors: usize) -> Result<()> {
        if self.p == 0 {
            return Err(CoreError::param("p", "at least one lagged difference of the dependent series is required"));
        }
        if nregressors == 0 {
            return Err(CoreError::param("regressors", "an ARDL model needs at least one regressor"));
        }
        if let Some(v) = &self.per_regressor_q {
            if v.len() != nregressors {
                return Err(CoreError::param(
                    "per_regressor_q",
                    alloc::format!("{} lag orders for {nregressors} regressors", v.len()),
                ));
            }
        }
        Ok(())
    }

    fn q_for(&self, regressor: usize) -> usize {
        self.per_regressor_q
            .as_ref()
            .map_or(self.q, |v| v[regressor])
    }
}

/// Which column groups of the ECM to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LevelTerms {
    /// `Y_{t-1}` and every `X_{j,t-1}`.
    Full,
    /// No level terms (the bounds-test null).
    None,
    /// `X_{j,t-1} - Y_{t-1}` per regressor: levels whose coefficients sum
    /// to zero.
    Summed,
}

/// Short-run terms followed by the level terms, then entity dummies and trend.
pub(crate) fn ecm_terms(sample: &EstimationSample, spec: &ArdlSpec, levels: LevelTerms) -> Vec<Term> {
    let nreg = sample.nregressors();
    let mut t = Vec::new();
    if spec.include_intercept {
        t.push(Term::Intercept);
    }
    t.extend((1..=spec.p).map(|lag| Term::DepDiff { lag }));
    for regressor in 0..nreg {
        let start = usize::from(!spec.contemporaneous);
        t.extend((start..=spec.q_for(regressor)).map(|lag| Term::RegDiff { regressor, lag }));
    }
    match levels {
        LevelTerms::Full => {
            t.push(Term::DepLevel { lag: 1 });
            t.extend((0..nreg).map(|regressor| Term::RegLevel { regressor, lag: 1 }));
        }
        LevelTerms::Summed => {
            t.extend((0..nreg).map(|regressor| Term::LevelGap { regressor, lag: 1 }));
        }
        LevelTerms::None => {}
    }
    t.extend(terms::entity_dummies(sample, spec.entity_effects, spec.include_intercept));
    if spec.trend {
        t.push(Term::Trend);
    }
    t
}

fn is_level(term: &Term) -> bool {
    matches!(term, Term::DepLevel { .. } | Term::RegLevel { .. })
}

/// First usable in-segment row of the ECM for `spec`.
pub fn ecm_first_row(sample: &EstimationSample, spec: &ArdlSpec) -> usize {
    terms::first_usable_row(&ecm_terms(sample, spec, LevelTerms::Full), Response::Diff)
}

/// ECM design with response `dY_t`. `first_row` defaults to the earliest row
/// where every lag exists; pass a later row to align several specifications
/// on one sample.
pub fn build_ecm_design(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    first_row: Option<usize>,
) -> Result<StackedDesign> {
    spec.validate(sample.nregressors())?;
    let terms = ecm_terms(sample, spec, LevelTerms::Full);
    let first = first_row.unwrap_or_else(|| terms::first_usable_row(&terms, Response::Diff));
    let stacked = terms::build(sample, &terms, Response::Diff, first, None)?;
    for (j, term) in stacked.terms.iter().enumerate() {
        if is_level(term) {
            let col = stacked.design.column(j);
            if col.iter().all(|v| *v == col[0]) {
                return Err(CoreError::ConstantColumn(stacked.design.names()[j].clone()));
            }
        }
    }
    Ok(stacked)
}

/// In-sample accuracy against the one-step naive forecast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    /// `None` when every naive error is zero.
    pub mase: Option<f64>,
    pub gmrae: Option<f64>,
    /// Terms left out of GMRAE because their naive error was (near) zero.
    pub gmrae_excluded: usize,
}

/// Metrics from paired model and naive errors; `scale` sets the GMRAE guard.
pub fn scaled_error_metrics(errors: &[f64], naive: &[f64], scale: f64) -> ForecastMetrics {
    debug_assert_eq!(errors.len(), naive.len());
    let num: f64 = errors.iter().map(|e| e.abs()).sum();
    let den: f64 = naive.iter().map(|e| e.abs()).sum();
    let mase = (den > 0.0).then(|| num / den);
    let guard = GMRAE_EPS * scale;
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for (e, d) in errors.iter().zip(naive) {
        if d.abs() < guard || *d == 0.0 {
            continue;
        }
        log_sum += libm::log(e.abs() / d.abs());
        used += 1;
    }
    let gmrae = (used > 0).then(|| libm::exp(log_sum / used as f64));
    ForecastMetrics {
        mase,
        gmrae,
        gmrae_excluded: errors.len() - used,
    }
}

/// MASE and GMRAE of `fitted` against `actual`, scaled by the in-sample
/// one-step naive forecast over `t >= 1`.
pub fn forecast_metrics(actual: &[f64], fitted: &[f64]) -> Result<ForecastMetrics> {
    if actual.len() != fitted.len() {
        return Err(CoreError::InvalidInput(alloc::format!(
            "{} actual values against {} fitted values",
            actual.len(),
            fitted.len()
        )));
    }
    if actual.len() < 3 {
        return Err(CoreError::InsufficientSample {
            needed: 2,
            available: actual.len(),
        });
    }
    let errors: Vec<f64> = (1..actual.len()).map(|t| actual[t] - fitted[t]).collect();
    let naive: Vec<f64> = (1..actual.len()).map(|t| actual[t] - actual[t - 1]).collect();
    let scale = actual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(scaled_error_metrics(&errors, &naive, scale))
}

/// `theta_j = -lambda_{j+1} / lambda_1`, or `None` when `lambda_1` is zero.
pub fn long_run_from_lambda(lambda: &[f64]) -> Option<Vec<f64>> {
    let l1 = *lambda.first()?;
    if l1.abs() <= LAMBDA_TOL {
        return None;
    }
    Some(lambda[1..].iter().map(|l| -l / l1).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArdlFit {
    pub spec: ArdlSpec,
    pub fit: OlsFit,
    pub stacked: StackedDesign,
    /// Level coefficients, `Y_{t-1}` first then each `X_{j,t-1}`.
    pub lambda: Vec<f64>,
    pub level_labels: Vec<String>,
    /// Non-level, non-deterministic coefficients by label.
    pub short_run: Vec<(String, f64)>,
    /// Long-run coefficient per regressor; `None` without error correction.
    pub long_run: Option<Vec<(String, f64)>>,
    pub adjustment_speed: f64,
    pub adjustment_t: f64,
    pub adjustment_p: f64,
    /// In-sample accuracy of the implied level forecast.
    pub metrics: ForecastMetrics,
}

impl ArdlFit {
    pub fn regressor_names(&self) -> Vec<&str> {
        self.level_labels[1..]
            .iter()
            .map(|l| l.rsplit_once('@').map_or(l.as_str(), |(name, _)| name))
            .collect()
    }
}

/// Fits the ECM over its full usable sample.
pub fn fit_ardl_ecm(sample: &EstimationSample, spec: &ArdlSpec) -> Result<ArdlFit> {
    fit_ardl_ecm_from(sample, spec, None)
}

/// Fits the ECM starting at in-segment row `first_row`.
pub fn fit_ardl_ecm_from(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    first_row: Option<usize>,
) -> Result<ArdlFit> {
    let stacked = build_ecm_design(sample, spec, first_row)?;
    let fit = ols_fit(&stacked.design, &stacked.response)?;
    let names = stacked.design.names();
    let mut lambda = Vec::new();
    let mut level_labels = Vec::new();
    let mut short_run = Vec::new();
    let mut adj = None;
    for (j, term) in stacked.terms.iter().enumerate() {
        if is_level(term) {
            if matches!(term, Term::DepLevel { .. }) {
                adj = Some(j);
            }
            lambda.push(fit.coef[j]);
            level_labels.push(names[j].clone());
        } else if !term.is_deterministic() {
            short_run.push((names[j].clone(), fit.coef[j]));
        }
    }
    let adj = adj.expect("ECM always has a lagged dependent level");
    let long_run = long_run_from_lambda(&lambda).map(|theta| {
        level_labels[1..]
            .iter()
            .zip(theta)
            .map(|(l, th)| (l.rsplit_once('@').map_or(l.clone(), |(n, _)| n.into()), th))
            .collect()
    });

    // Level forecast: Y_{t-1} + fitted dY_t, so its error is the ECM residual
    // and the naive error is dY_t itself.
    let scale = level_scale(sample, &stacked);
    let metrics = scaled_error_metrics(&fit.residuals, &stacked.response, scale);

    Ok(ArdlFit {
        spec: spec.clone(),
        lambda,
        level_labels,
        short_run,
        long_run,
        adjustment_speed: fit.coef[adj],
        adjustment_t: fit.t_values[adj],
        adjustment_p: fit.p_values[adj],
        metrics,
        fit,
        stacked,
    })
}

fn level_scale(sample: &EstimationSample, stacked: &StackedDesign) -> f64 {
    stacked
        .rows
        .iter()
        .map(|&(s, t)| sample.segments()[s].dependent().values[t].abs())
        .fold(0.0, f64::max)
}

/// Drops insignificant short-run terms one at a time, keeping the level
/// and deterministic terms.
pub fn reduce_ardl(fit: &ArdlFit, alpha: f64) -> Result<Elimination> {
    let protected: Vec<bool> = fit
        .stacked
        .terms
        .iter()
        .map(|t| t.is_deterministic() || is_level(t))
        .collect();
    backward_eliminate(&fit.stacked.design, &fit.stacked.response, &protected, alpha, DropMode::Term)
}

/// Named long-run coefficients, or an error when `lambda_1` is zero.
pub fn long_run_coefficients(fit: &ArdlFit) -> Result<Vec<(String, f64)>> {
    fit.long_run.clone().ok_or_else(|| {
        CoreError::Undefined(alloc::format!(
            "adjustment speed {} is zero; no error correction",
            fit.adjustment_speed
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCell {
    pub p: usize,
    pub q: usize,
    pub aic: f64,
    pub bic: f64,
    pub mase: Option<f64>,
    pub gmrae: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSearchResult {
    /// Estimable cells in `(p, q)` order.
    pub grid: Vec<LagCell>,
    /// `(p, q)` pairs that could not be estimated.
    pub failed: Vec<(usize, usize)>,
    pub selected: (usize, usize),
    pub criterion: Criterion,
    /// In-segment row where every cell's sample starts.
    pub first_row: usize,
}

impl LagSearchResult {
    pub fn selected_cell(&self) -> &LagCell {
        self.grid
            .iter()
            .find(|c| (c.p, c.q) == self.selected)
            .expect("selected cell is in the grid")
    }
}

/// Evaluates every `(p, q)` in `1..=p_max` x `0..=q_max` on the sample of
/// the largest cell and picks the criterion minimum (ties to smaller `p`,
/// then smaller `q`).
pub fn select_lags<E: Executor>(
    sample: &EstimationSample,
    template: &ArdlSpec,
    p_max: usize,
    q_max: usize,
    criterion: Criterion,
    exec: &E,
) -> Result<LagSearchResult> {
    if p_max == 0 {
        return Err(CoreError::param("p_max", "must be at least 1"));
    }
    let widest = ArdlSpec {
        p: p_max,
        q: q_max,
        per_regressor_q: None,
        ..template.clone()
    };
    widest.validate(sample.nregressors())?;
    let first_row = ecm_first_row(sample, &widest);
    let cells: Vec<(usize, usize)> = (1..=p_max)
        .flat_map(|p| (0..=q_max).map(move |q| (p, q)))
        .collect();
    let outcomes = exec.map(cells.len(), |i| {
        let (p, q) = cells[i];
        let spec = ArdlSpec {
            p,
            q,
            per_regressor_q: None,
            ..template.clone()
        };
        fit_ardl_ecm_from(sample, &spec, Some(first_row)).map(|f| LagCell {
            p,
            q,
            aic: f.fit.aic,
            bic: f.fit.bic,
            mase: f.metrics.mase,
            gmrae: f.metrics.gmrae,
        })
    });
    let mut grid = Vec::new();
    let mut failed = Vec::new();
    let mut last_err = None;
    for (cell, out) in cells.iter().zip(outcomes) {
        match out {
            Ok(c) => grid.push(c),
            Err(e) => {
                failed.push(*cell);
                last_err = Some(e);
            }
        }
    }
    let score = |c: &LagCell| match criterion {
        Criterion::Aic => c.aic,
        Criterion::Bic => c.bic,
    };
    let mut best: Option<&LagCell> = None;
    for c in &grid {
        if best.map_or(true, |b| score(c) < score(b)) {
            best = Some(c);
        }
    }
    let Some(best) = best else {
        return Err(last_err.unwrap_or_else(|| CoreError::Degenerate("empty lag grid".into())));
    };
    Ok(LagSearchResult {
        selected: (best.p, best.q),
        grid,
        failed,
        criterion,
        first_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{gen_random_walk, gen_white_noise};
    use crate::exec::Sequential;
    use crate::frame::AlignedSeriesSet;

    fn sample(y: Vec<f64>, x: Vec<f64>) -> EstimationSample {
        AlignedSeriesSet::from_vectors(("Y", y), alloc::vec![("X", x)])
            .unwrap()
            .into()
    }

    #[test]
    fn design_shape_for_length_ten() {
        let s = sample(gen_random_walk(10, 1), gen_random_walk(10, 2));
        let d = build_ecm_design(&s, &ArdlSpec::new(1, 1), None).unwrap();
        assert_eq!(d.design.ncols(), 5);
        assert_eq!(d.design.nrows(), 8);
        assert_eq!(
            d.design.names(),
            &["(Intercept)", "d(Y)@1", "d(X)@1", "Y@1", "X@1"]
        );
        let d2 = build_ecm_design(&s, &ArdlSpec::new(2, 1), None).unwrap();
        assert_eq!(d2.design.ncols(), 6);
    }

    #[test]
    fn lagged_level_column_is_raw_lag() {
        let y = gen_random_walk(12, 3);
        let s = sample(y.clone(), gen_random_walk(12, 4));
        let d = build_ecm_design(&s, &ArdlSpec::new(1, 1), None).unwrap();
        let j = d.design.column_index("Y@1").unwrap();
        for (row, &(_, t)) in d.rows.iter().enumerate() {
            assert_eq!(d.design.value(row, j), y[t - 1]);
            assert_eq!(d.response[row], y[t] - y[t - 1]);
        }
    }

    #[test]
    fn constant_level_is_rejected() {
        let s = sample(gen_random_walk(20, 5), alloc::vec![1.0; 20]);
        let err = build_ecm_design(&s, &ArdlSpec::new(1, 0), None).unwrap_err();
        assert_eq!(err, CoreError::ConstantColumn("X@1".into()));
    }

    #[test]
    fn long_run_arithmetic() {
        assert_eq!(long_run_from_lambda(&[-0.5, 0.25]).unwrap(), alloc::vec![0.5]);
        assert_eq!(long_run_from_lambda(&[-1.0, 0.3, -0.2]).unwrap(), alloc::vec![0.3, -0.2]);
        assert_eq!(long_run_from_lambda(&[-1.0, 0.0]).unwrap(), alloc::vec![0.0]);
        assert!(long_run_from_lambda(&[0.0, 1.0]).is_none());
        let scaled = long_run_from_lambda(&[-3.0, 0.9, -0.6]).unwrap();
        assert!((scaled[0] - 0.3).abs() < 1e-15 && (scaled[1] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn naive_forecast_scores_exactly_one() {
        let y = gen_random_walk(30, 6);
        let mut naive = alloc::vec![y[0]];
        naive.extend_from_slice(&y[..29]);
        let m = forecast_metrics(&y, &naive).unwrap();
        assert_eq!(m.mase, Some(1.0));
        assert_eq!(m.gmrae, Some(1.0));
        let exact = forecast_metrics(&y, &y).unwrap();
        assert_eq!(exact.mase, Some(0.0));
    }

    #[test]
    fn metrics_match_direct_formula() {
        let y = [1.0, 2.5, 2.0, 4.0, 3.5, 5.0];
        let f = [1.1, 2.0, 2.4, 3.7, 3.9, 4.6];
        let m = forecast_metrics(&y, &f).unwrap();
        // Hand-expanded sums over t = 1..5.
        let e = [0.5, -0.4, 0.3, -0.4, 0.4];
        let d = [1.5, -0.5, 2.0, -0.5, 1.5];
        let num: f64 = e.iter().map(|v: &f64| v.abs()).sum();
        let den: f64 = d.iter().map(|v: &f64| v.abs()).sum();
        assert!((m.mase.unwrap() - num / den).abs() < 1e-12);
        let lg: f64 = e.iter().zip(&d).map(|(a, b): (&f64, &f64)| libm::log(a.abs() / b.abs())).sum();
        assert!((m.gmrae.unwrap() - libm::exp(lg / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_series_metrics_undefined() {
        let y = [2.0; 5];
        let m = forecast_metrics(&y, &[1.0; 5]).unwrap();
        assert!(m.mase.is_none() && m.gmrae.is_none());
        assert_eq!(m.gmrae_excluded, 4);
    }

    #[test]
    fn reduction_keeps_levels() {
        let x = gen_random_walk(60, 13);
        let e = gen_white_noise(60, 14);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 0.5 * a + 0.2 * b).collect();
        let fit = fit_ardl_ecm(&sample(y, x), &ArdlSpec::new(3, 2)).unwrap();
        let r = reduce_ardl(&fit, 1e-9).unwrap();
        let names = r.design.names();
        assert!(names.iter().any(|n| n == "Y@1") && names.iter().any(|n| n == "X@1"));
        assert_eq!(names[0], "(Intercept)");
        assert_eq!(names.len() + r.dropped.len(), fit.stacked.design.ncols());
    }

    #[test]
    fn single_cell_grid() {
        let s = sample(gen_random_walk(40, 7), gen_random_walk(40, 8));
        let r = select_lags(&s, &ArdlSpec::default(), 1, 0, Criterion::Bic, &Sequential).unwrap();
        assert_eq!(r.selected, (1, 0));
        assert_eq!(r.grid.len(), 1);
    }

    #[test]
    fn selection_ignores_positive_rescaling() {
        let y = gen_random_walk(60, 9);
        let x = gen_white_noise(60, 10);
        let s = sample(y.clone(), x.clone());
        let s2 = sample(y.iter().map(|v| v * 37.5).collect(), x);
        let a = select_lags(&s, &ArdlSpec::default(), 3, 2, Criterion::Aic, &Sequential).unwrap();
        let b = select_lags(&s2, &ArdlSpec::default(), 3, 2, Criterion::Aic, &Sequential).unwrap();
        assert_eq!(a.selected, b.selected);
    }

    #[test]
    fn regressor_rescaling_divides_theta() {
        let x = gen_random_walk(80, 11);
        let e = gen_white_noise(80, 12);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 0.5 * a + 0.1 * b).collect();
        let base = fit_ardl_ecm(&sample(y.clone(), x.clone()), &ArdlSpec::new(1, 1)).unwrap();
        let scaled = fit_ardl_ecm(&sample(y, x.iter().map(|v| v * 4.0).collect()), &ArdlSpec::new(1, 1)).unwrap();
        let t0 = base.long_run.unwrap()[0].1;
        let t1 = scaled.long_run.unwrap()[0].1;
        assert!((t1 - t0 / 4.0).abs() < 1e-9);
    }
}
