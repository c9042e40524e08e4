//! Residual diagnostics: serial correlation, heteroskedasticity,
//! normality, functional form and influence.

mod shapiro;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ardl::{fit_ardl_ecm, ArdlSpec};
use crate::bounds::{bounds_test, BootstrapParams};
use crate::dist::DistSpec;
use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::frame::EstimationSample;
use crate::ols::{f_from_rss, ols_fit, wald_f, DesignMatrix, OlsFit, PERFECT_FIT_TOL};
use crate::stats;

pub use shapiro::shapiro_wilk_w;

/// What a test's p-value is computed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    Distribution(DistSpec),
    /// Bootstrap proportion of replications at or above the statistic.
    Bootstrap { replications: usize, seed: u64 },
    /// Royston's normal approximation for W.
    Royston,
    /// No p-value could be formed (degenerate input).
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    pub reference: Reference,
    pub p_value: f64,
    /// The input made the test trivial (e.g. zero residual variance).
    pub degenerate: bool,
    pub details: Vec<(String, f64)>,
}

impl TestResult {
    fn from_dist(name: &str, statistic: f64, dist: DistSpec, details: Vec<(String, f64)>) -> Result<Self> {
        let p_value = dist.sf(statistic)?;
        Ok(Self {
            name: name.into(),
            statistic,
            reference: Reference::Distribution(dist),
            p_value,
            degenerate: false,
            details,
        })
    }

    fn degenerate(name: &str, details: Vec<(String, f64)>) -> Self {
        Self {
            name: name.into(),
            statistic: 0.0,
            reference: Reference::None,
            p_value: 1.0,
            degenerate: true,
            details,
        }
    }

    pub fn detail(&self, key: &str) -> Option<f64> {
        self.details.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

fn detail(key: &str, value: f64) -> (String, f64) {
    (key.to_string(), value)
}

fn all_zero(values: &[f64]) -> bool {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    scale == 0.0
}

/// Breusch-Godfrey LM test for serial correlation up to lag `p` on a single
/// series of residuals.
pub fn breusch_godfrey(x: &DesignMatrix, fit: &OlsFit, p: usize) -> Result<TestResult> {
    breusch_godfrey_segmented(x, fit, p, &[0])
}

/// Breusch-Godfrey with residual lags restarted (zero-filled) at each index
/// in `segment_starts`, for stacked panels.
pub fn breusch_godfrey_segmented(
    x: &DesignMatrix,
    fit: &OlsFit,
    p: usize,
    segment_starts: &[usize],
) -> Result<TestResult> {
    const NAME: &str = "Breusch-Godfrey";
    if p == 0 {
        return Err(CoreError::param("p", "lag order must be at least 1"));
    }
    let n = fit.nobs;
    if n < x.ncols() + p + 1 {
        return Err(CoreError::InsufficientSample {
            needed: x.ncols() + p,
            available: n,
        });
    }
    let e = &fit.residuals;
    if all_zero(e) {
        return Ok(TestResult::degenerate(NAME, alloc::vec![detail("lags", p as f64)]));
    }
    let mut start_of = alloc::vec![0usize; n];
    let mut current = 0;
    for (i, s) in start_of.iter_mut().enumerate() {
        if segment_starts.contains(&i) {
            current = i;
        }
        *s = current;
    }
    let mut aux = x.clone();
    for lag in 1..=p {
        let col: Vec<f64> = (0..n)
            .map(|i| if i >= start_of[i] + lag { e[i - lag] } else { 0.0 })
            .collect();
        aux = aux.with_column(format!("resid@{lag}"), col)?;
    }
    let aux_fit = ols_fit(&aux, e)?;
    let lm = (n as f64 * aux_fit.r2).max(0.0);
    TestResult::from_dist(
        NAME,
        lm,
        DistSpec::ChiSquare { df: p as f64 },
        alloc::vec![detail("lags", p as f64), detail("aux_r2", aux_fit.r2)],
    )
}

/// Default Ljung-Box lag count, `min(10, n / 5)` but at least 1.
pub fn ljung_box_default_lags(n: usize) -> usize {
    (n / 5).clamp(1, 10)
}

/// Ljung-Box portmanteau test on `h` autocorrelations (biased estimator).
pub fn ljung_box(residuals: &[f64], h: usize) -> Result<TestResult> {
    const NAME: &str = "Ljung-Box";
    let n = residuals.len();
    if h == 0 || h >= n {
        return Err(CoreError::param("h", format!("need 1 <= h < n = {n}, got {h}")));
    }
    let m = stats::mean(residuals);
    let d: Vec<f64> = residuals.iter().map(|v| v - m).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Ok(TestResult::degenerate(NAME, alloc::vec![detail("lags", h as f64)]));
    }
    let nf = n as f64;
    let mut q = 0.0;
    for k in 1..=h {
        let ck: f64 = (k..n).map(|t| d[t] * d[t - k]).sum();
        let r = ck / c0;
        q += r * r / (nf - k as f64);
    }
    q *= nf * (nf + 2.0);
    TestResult::from_dist(NAME, q, DistSpec::ChiSquare { df: h as f64 }, alloc::vec![detail("lags", h as f64)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreuschPaganForm {
    /// `n R^2` of squared residuals on the regressors.
    #[default]
    Koenker,
    /// Half the explained sum of squares of `e^2 / sigma^2`.
    Classic,
}

/// Breusch-Pagan test of residual variance depending on the regressors.
pub fn breusch_pagan(x: &DesignMatrix, fit: &OlsFit, form: BreuschPaganForm) -> Result<TestResult> {
    const NAME: &str = "Breusch-Pagan";
    let n = fit.nobs;
    let aux = if x.has_intercept() {
        x.clone()
    } else {
        let mut cols: Vec<(String, Vec<f64>)> = x
            .names()
            .iter()
            .cloned()
            .zip(x.columns().iter().cloned())
            .collect();
        cols.retain(|(_, c)| c.iter().any(|v| *v != c[0]));
        DesignMatrix::with_intercept(cols, n)?
    };
    let df = aux.ncols() - 1;
    if df == 0 {
        return Err(CoreError::Undefined("Breusch-Pagan needs at least one non-constant regressor".into()));
    }
    if n <= aux.ncols() + 1 {
        return Err(CoreError::InsufficientSample {
            needed: aux.ncols() + 1,
            available: n,
        });
    }
    let e2: Vec<f64> = fit.residuals.iter().map(|v| v * v).collect();
    if all_zero(&e2) {
        return Ok(TestResult::degenerate(NAME, alloc::vec![]));
    }
    let lm = match form {
        BreuschPaganForm::Koenker => {
            let f = ols_fit(&aux, &e2)?;
            n as f64 * f.r2
        }
        BreuschPaganForm::Classic => {
            let s2 = fit.rss / n as f64;
            let g: Vec<f64> = e2.iter().map(|v| v / s2).collect();
            let f = ols_fit(&aux, &g)?;
            let gm = stats::mean(&g);
            0.5 * f.fitted.iter().map(|v| (v - gm) * (v - gm)).sum::<f64>()
        }
    };
    TestResult::from_dist(
        NAME,
        lm.max(0.0),
        DistSpec::ChiSquare { df: df as f64 },
        alloc::vec![detail("df", df as f64)],
    )
}

pub fn shapiro_wilk(residuals: &[f64]) -> Result<TestResult> {
    let (w, p) = shapiro_wilk_w(residuals)?;
    Ok(TestResult {
        name: "Shapiro-Wilk".into(),
        statistic: w,
        reference: Reference::Royston,
        p_value: p,
        degenerate: false,
        details: alloc::vec![detail("n", residuals.len() as f64)],
    })
}

/// Ramsey RESET: F test of powers of the (unit-scaled) fitted values added
/// to the design.
pub fn ramsey_reset(x: &DesignMatrix, y: &[f64], fit: &OlsFit, powers: &[u32]) -> Result<TestResult> {
    const NAME: &str = "RESET";
    if powers.is_empty() || powers.iter().any(|&p| p < 2) {
        return Err(CoreError::param("powers", "need one or more powers of at least 2"));
    }
    let n = fit.nobs;
    if n <= x.ncols() + powers.len() {
        return Err(CoreError::InsufficientSample {
            needed: x.ncols() + powers.len(),
            available: n,
        });
    }
    let sd = stats::sample_sd(&fit.fitted);
    if !(sd > 0.0) {
        return Err(CoreError::RankDeficient {
            column: "fitted^2".into(),
        });
    }
    let mut aug = x.clone();
    for &p in powers {
        let col = fit.fitted.iter().map(|v| libm::pow(v / sd, f64::from(p))).collect();
        aug = aug.with_column(format!("fitted^{p}"), col)?;
    }
    let aug_fit = ols_fit(&aug, y)?;
    let w = wald_f(&aug_fit, fit, powers.len())?;
    let mut details = alloc::vec![detail("df1", w.df1 as f64), detail("df2", w.df2 as f64)];
    if w.f_stat == 0.0 && w.p_value == 1.0 && aug_fit.rss <= aug_fit.perfect_fit_threshold() {
        details.push(detail("exact_fit", 1.0));
    }
    Ok(TestResult {
        name: NAME.into(),
        statistic: w.f_stat,
        reference: Reference::Distribution(DistSpec::F {
            df1: w.df1 as f64,
            df2: w.df2 as f64,
        }),
        p_value: w.p_value,
        degenerate: w.f_stat.is_infinite(),
        details,
    })
}

/// Central-subsample bounds `[lo, hi)` for `n` ordered rows.
pub fn rainbow_window(n: usize, fraction: f64) -> (usize, usize) {
    let lo = libm::ceil(0.5 * (1.0 - fraction) * n as f64) as usize;
    let hi = (libm::floor(lo as f64 + fraction * n as f64) as usize).min(n);
    (lo, hi)
}

/// Utts' Rainbow test: the full-sample fit against a fit on the central
/// `fraction` of rows, taken in `order` (row indices sorted by time).
pub fn rainbow(x: &DesignMatrix, y: &[f64], order: Option<&[usize]>, fraction: f64) -> Result<TestResult> {
    const NAME: &str = "Rainbow";
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(CoreError::param("fraction", "must lie in (0, 1]"));
    }
    let n = x.nrows();
    let identity: Vec<usize> = (0..n).collect();
    let order = order.unwrap_or(&identity);
    if order.len() != n {
        return Err(CoreError::InvalidInput("row order has the wrong length".into()));
    }
    let (lo, hi) = rainbow_window(n, fraction);
    let n_sub = hi - lo;
    let k = x.ncols();
    if n_sub <= k {
        return Err(CoreError::InsufficientSample {
            needed: k,
            available: n_sub,
        });
    }
    let full = ols_fit(x, y)?;
    let details = alloc::vec![detail("lo", lo as f64), detail("hi", hi as f64)];
    if n_sub == n {
        let mut r = TestResult::degenerate(NAME, details);
        r.degenerate = false;
        return Ok(r);
    }
    let rows = &order[lo..hi];
    let sub_x = x.select_rows(rows);
    let sub_y: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let sub = ols_fit(&sub_x, &sub_y)?;
    let m = n - n_sub;
    let df2 = n_sub - k;
    let (f, p) = f_from_rss(full.rss, sub.rss, m, df2, PERFECT_FIT_TOL * full.tss)?;
    Ok(TestResult {
        name: NAME.into(),
        statistic: f,
        reference: Reference::Distribution(DistSpec::F {
            df1: m as f64,
            df2: df2 as f64,
        }),
        p_value: p,
        degenerate: full.rss <= PERFECT_FIT_TOL * full.tss,
        details,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceReport {
    pub leverage: Vec<f64>,
    /// `+inf` where the leverage is one.
    pub cooks_distance: Vec<f64>,
    pub cook_threshold: f64,
    pub leverage_threshold: f64,
    /// Rows exceeding either threshold, ascending.
    pub flagged: Vec<usize>,
}

/// Leverage and Cook's distance with flags at `cook_factor / n` and
/// `leverage_factor * k / n` (defaults 4 and 2).
pub fn influence_measures(
    fit: &OlsFit,
    cook_factor: Option<f64>,
    leverage_factor: Option<f64>,
) -> InfluenceReport {
    let n = fit.nobs as f64;
    let k = fit.ncoef() as f64;
    let cook_threshold = cook_factor.unwrap_or(4.0) / n;
    let leverage_threshold = leverage_factor.unwrap_or(2.0) * k / n;
    let s2 = fit.sigma2;
    let cooks_distance: Vec<f64> = fit
        .residuals
        .iter()
        .zip(&fit.leverage)
        .map(|(e, &h)| {
            let one_minus = 1.0 - h;
            if one_minus <= 1e-12 {
                f64::INFINITY
            } else if s2 == 0.0 {
                0.0
            } else {
                e * e * h / (k * s2 * one_minus * one_minus)
            }
        })
        .collect();
    let flagged = (0..fit.nobs)
        .filter(|&i| cooks_distance[i] > cook_threshold || fit.leverage[i] > leverage_threshold)
        .collect();
    InfluenceReport {
        leverage: fit.leverage.clone(),
        cooks_distance,
        cook_threshold,
        leverage_threshold,
        flagged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    #[serde(default = "one")]
    pub bg_lags: usize,
    /// Defaults to `min(10, n / 5)`.
    #[serde(default)]
    pub lb_lags: Option<usize>,
    #[serde(default)]
    pub bp_form: BreuschPaganForm,
    #[serde(default = "default_powers")]
    pub reset_powers: Vec<u32>,
    #[serde(default)]
    pub bootstrap: BootstrapParams,
}

fn one() -> usize {
    1
}

fn default_powers() -> Vec<u32> {
    alloc::vec![2, 3]
}

impl Default for BatteryParams {
    fn default() -> Self {
        Self {
            bg_lags: 1,
            lb_lags: None,
            bp_form: BreuschPaganForm::default(),
            reset_powers: default_powers(),
            bootstrap: BootstrapParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryEntry {
    /// `Test1` .. `Test6`.
    pub label: String,
    pub test: String,
    pub outcome: core::result::Result<TestResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub entries: Vec<BatteryEntry>,
}

impl DiagnosticsReport {
    /// Statistic per entry in order; `None` for failed tests.
    pub fn statistics(&self) -> Vec<Option<f64>> {
        self.entries
            .iter()
            .map(|e| e.outcome.as_ref().ok().map(|r| r.statistic))
            .collect()
    }
}

/// Runs the six-test battery on the ECM fit. A failing test is recorded and
/// the rest still run.
pub fn run_battery<E: Executor>(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    params: &BatteryParams,
    exec: &E,
) -> Result<DiagnosticsReport> {
    let ardl = fit_ardl_ecm(sample, spec)?;
    let x = &ardl.stacked.design;
    let fit = &ardl.fit;
    let starts = ardl.stacked.segment_starts();
    let h = params
        .lb_lags
        .unwrap_or_else(|| ljung_box_default_lags(fit.nobs));

    let outcomes: [(&str, Result<TestResult>); 6] = [
        ("Breusch-Godfrey", breusch_godfrey_segmented(x, fit, params.bg_lags, &starts)),
        ("Ljung-Box", ljung_box(&fit.residuals, h)),
        ("Breusch-Pagan", breusch_pagan(x, fit, params.bp_form)),
        ("Shapiro-Wilk", shapiro_wilk(&fit.residuals)),
        (
            "PSS F",
            bounds_test(sample, spec, &params.bootstrap, exec).map(|b| TestResult {
                name: "PSS F".into(),
                statistic: b.f_stat,
                reference: Reference::Bootstrap {
                    replications: b.replications,
                    seed: b.seed,
                },
                p_value: b.p_value,
                degenerate: false,
                details: b
                    .decisions
                    .iter()
                    .map(|d| (format!("cv{}", d.level), d.critical_value))
                    .collect(),
            }),
        ),
        ("RESET", ramsey_reset(x, &ardl.stacked.response, fit, &params.reset_powers)),
    ];
    let entries = outcomes
        .into_iter()
        .enumerate()
        .map(|(i, (test, r))| BatteryEntry {
            label: format!("Test{}", i + 1),
            test: test.into(),
            outcome: r.map_err(|e| e.to_string()),
        })
        .collect();
    Ok(DiagnosticsReport { entries })
}
