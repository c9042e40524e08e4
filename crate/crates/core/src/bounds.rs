//! Bounds test for a long-run relationship: F test on the ECM level terms
//! with critical values from a residual bootstrap under the null.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ardl::{build_ecm_design, ecm_terms, ArdlSpec, LevelTerms};
use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::frame::EstimationSample;
use crate::ols::{ols_fit, wald_f, OlsFit, WaldF};
use crate::rng::{self, domain};
use crate::stats;
use crate::terms::{self, Response, StackedDesign, Term};

pub const MIN_REPLICATIONS: usize = 99;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapParams {
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Also report the single-restriction test that the level coefficients
    /// sum to zero.
    #[serde(default)]
    pub summed_form: bool,
}

fn default_replications() -> usize {
    2000
}

fn default_levels() -> Vec<f64> {
    alloc::vec![0.90, 0.95, 0.99]
}

impl Default for BootstrapParams {
    fn default() -> Self {
        Self {
            replications: default_replications(),
            seed: 0,
            levels: default_levels(),
            summed_form: false,
        }
    }
}

impl BootstrapParams {
    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(CoreError::param(
                "replications",
                format!("need at least {MIN_REPLICATIONS}, got {}", self.replications),
            ));
        }
        if self.levels.is_empty() {
            return Err(CoreError::param("levels", "at least one level is required"));
        }
        if self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(CoreError::param("levels", "levels must lie strictly inside (0, 1)"));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::param("levels", "levels must be strictly increasing"));
        }
        Ok(())
    }
}

/// The joint F test and the two fits behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct PssF {
    pub test: WaldF,
    pub restricted: OlsFit,
    pub unrestricted: OlsFit,
}

fn joint_f(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    first_row: usize,
    dep: Option<&[Vec<f64>]>,
) -> Result<PssF> {
    let full = ecm_terms(sample, spec, LevelTerms::Full);
    let null = ecm_terms(sample, spec, LevelTerms::None);
    let u = terms::build(sample, &full, Response::Diff, first_row, dep)?;
    let r = terms::build(sample, &null, Response::Diff, first_row, dep)?;
    let unrestricted = ols_fit(&u.design, &u.response)?;
    let restricted = ols_fit(&r.design, &r.response)?;
    let test = wald_f(&unrestricted, &restricted, full.len() - null.len())?;
    Ok(PssF {
        test,
        restricted,
        unrestricted,
    })
}

/// Joint F that `Y_{t-1}` and every `X_{j,t-1}` have zero coefficients.
pub fn pss_f_statistic(sample: &EstimationSample, spec: &ArdlSpec) -> Result<PssF> {
    let design = build_ecm_design(sample, spec, None)?;
    joint_f(sample, spec, design.first_row, None)
}

/// F test that the level coefficients sum to zero (one restriction).
pub fn summed_f_statistic(sample: &EstimationSample, spec: &ArdlSpec) -> Result<WaldF> {
    let design = build_ecm_design(sample, spec, None)?;
    let unrestricted = ols_fit(&design.design, &design.response)?;
    let gap = ecm_terms(sample, spec, LevelTerms::Summed);
    let r = terms::build(sample, &gap, Response::Diff, design.first_row, None)?;
    let restricted = ols_fit(&r.design, &r.response)?;
    wald_f(&unrestricted, &restricted, 1)
}

/// Bootstrap distribution of the joint F under the null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution {
    /// `(level, critical value)` pairs.
    pub critical_values: Vec<(f64, f64)>,
    /// F statistic of each replication, in replication order.
    pub sample: Vec<f64>,
}

/// True when `x_t = sum a_i x_{t-i} + e_t` is stationary, by the step-down
/// (Schur-Cohn) recursion on the reflection coefficients.
pub fn is_stationary_ar(coef: &[f64]) -> bool {
    let mut a = coef.to_vec();
    while let Some(&k) = a.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let m = a.len() - 1;
        let denom = 1.0 - k * k;
        a = (0..m).map(|i| (a[i] + k * a[m - 1 - i]) / denom).collect();
    }
    true
}

/// Rebuilds the dependent series of every segment from resampled residuals
/// of the restricted model, keeping the observed values before `first_row`.
fn rebuild_dependent(
    sample: &EstimationSample,
    null: &StackedDesign,
    coef: &[f64],
    draws: &[f64],
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = sample
        .segments()
        .iter()
        .map(|s| s.dependent().values.clone())
        .collect();
    for (row, &(s, t)) in null.rows.iter().enumerate() {
        let seg = &sample.segments()[s];
        let dep = &out[s];
        let mean: f64 = null
            .terms
            .iter()
            .zip(coef)
            .map(|(term, b)| b * term.eval(s, seg, dep, t))
            .sum();
        let prev = out[s][t - 1];
        out[s][t] = prev + mean + draws[row];
    }
    out
}

/// Residual bootstrap of the joint F under the restricted (no-levels) ECM.
/// Replication `b` draws from its own stream, so the result is the same on
/// any executor.
pub fn bootstrap_critical_values<E: Executor>(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    params: &BootstrapParams,
    exec: &E,
) -> Result<BootstrapDistribution> {
    params.validate()?;
    let first_row = build_ecm_design(sample, spec, None)?.first_row;
    let null_terms = ecm_terms(sample, spec, LevelTerms::None);
    let null = terms::build(sample, &null_terms, Response::Diff, first_row, None)?;
    let null_fit = ols_fit(&null.design, &null.response)?;
    let ar: Vec<f64> = null
        .terms
        .iter()
        .zip(&null_fit.coef)
        .filter_map(|(t, b)| matches!(t, Term::DepDiff { .. }).then_some(*b))
        .collect();
    if !is_stationary_ar(&ar) {
        return Err(CoreError::Degenerate(format!(
            "restricted model has explosive short-run dynamics (lagged-difference coefficients {ar:?}); \
             the recursive bootstrap is undefined"
        )));
    }
    let centre = stats::mean(&null_fit.residuals);
    let resid: Vec<f64> = null_fit.residuals.iter().map(|e| e - centre).collect();
    let n = resid.len();

    let stats_out = exec.map(params.replications, |b| {
        let mut rng = rng::stream(params.seed, domain::BOOTSTRAP, b as u64);
        let draws: Vec<f64> = (0..n).map(|_| resid[rng::index_below(&mut rng, n)]).collect();
        let dep = rebuild_dependent(sample, &null, &null_fit.coef, &draws);
        joint_f(sample, spec, first_row, Some(&dep)).map(|f| f.test.f_stat)
    });
    let sample_f = stats_out.into_iter().collect::<Result<Vec<f64>>>()?;
    let sorted = stats::sorted(&sample_f);
    let critical_values = params
        .levels
        .iter()
        .map(|&l| (l, stats::quantile_nearest_rank(&sorted, l)))
        .collect();
    Ok(BootstrapDistribution {
        critical_values,
        sample: sample_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelDecision {
    pub level: f64,
    pub critical_value: f64,
    /// True when the null of no long-run relationship is rejected.
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub f_stat: f64,
    /// Number of joint restrictions (`1 + #regressors`).
    pub restrictions: usize,
    /// Classical F p-value, for reference only.
    pub asymptotic_p: f64,
    pub decisions: Vec<LevelDecision>,
    /// `(1 + #{F_b >= F}) / (B + 1)`.
    pub p_value: f64,
    pub replications: usize,
    pub seed: u64,
    pub summed: Option<WaldF>,
    pub narrative: String,
    pub bootstrap_sample: Vec<f64>,
}

/// Reject when `f_stat` exceeds the critical value.
pub fn decide(f_stat: f64, critical_values: &[(f64, f64)]) -> Vec<LevelDecision> {
    critical_values
        .iter()
        .map(|&(level, cv)| LevelDecision {
            level,
            critical_value: cv,
            reject: f_stat > cv,
        })
        .collect()
}

pub fn narrative(f_stat: f64, decisions: &[LevelDecision]) -> String {
    let mut out = format!("F = {f_stat:.4}.");
    for d in decisions {
        let pct = libm::round((1.0 - d.level) * 1000.0) / 10.0;
        let verb = if d.reject { "Reject" } else { "Fail to reject" };
        out.push_str(&format!(
            " {verb} the null hypothesis of no cointegration at the {pct}% level (critical value {:.4}).",
            d.critical_value
        ));
    }
    out
}

pub fn bounds_test<E: Executor>(
    sample: &EstimationSample,
    spec: &ArdlSpec,
    params: &BootstrapParams,
    exec: &E,
) -> Result<BoundsResult> {
    let pss = pss_f_statistic(sample, spec)?;
    let dist = bootstrap_critical_values(sample, spec, params, exec)?;
    let f = pss.test.f_stat;
    let exceed = dist.sample.iter().filter(|&&fb| fb >= f).count();
    let p_value = (1 + exceed) as f64 / (params.replications + 1) as f64;
    let decisions = decide(f, &dist.critical_values);
    let summed = if params.summed_form {
        Some(summed_f_statistic(sample, spec)?)
    } else {
        None
    };
    Ok(BoundsResult {
        f_stat: f,
        restrictions: pss.test.df1,
        asymptotic_p: pss.test.p_value,
        narrative: narrative(f, &decisions),
        decisions,
        p_value,
        replications: params.replications,
        seed: params.seed,
        summed,
        bootstrap_sample: dist.sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{gen_cointegrated_pair, gen_random_walk, gen_white_noise};
    use crate::exec::Sequential;
    use crate::frame::AlignedSeriesSet;

    fn sample(y: Vec<f64>, x: Vec<f64>) -> EstimationSample {
        AlignedSeriesSet::from_vectors(("Y", y), alloc::vec![("X", x)])
            .unwrap()
            .into()
    }

    fn params(b: usize, seed: u64) -> BootstrapParams {
        BootstrapParams {
            replications: b,
            seed,
            ..BootstrapParams::default()
        }
    }

    #[test]
    fn params_validation() {
        assert!(params(98, 0).validate().is_err());
        assert!(params(99, 0).validate().is_ok());
        let mut p = params(199, 0);
        p.levels = alloc::vec![0.95, 0.90];
        assert!(p.validate().is_err());
        p.levels = alloc::vec![0.5, 1.0];
        assert!(p.validate().is_err());
    }

    #[test]
    fn restriction_count() {
        let s = sample(gen_random_walk(40, 1), gen_random_walk(40, 2));
        let f = pss_f_statistic(&s, &ArdlSpec::new(1, 1)).unwrap();
        assert_eq!(f.test.df1, 2);
        assert_eq!(f.unrestricted.ncoef(), f.restricted.ncoef() + 2);
    }

    #[test]
    fn critical_values_monotone_and_reproducible() {
        let (x, y) = gen_cointegrated_pair(60, 0.5, 0.3, 3);
        let s = sample(y, x);
        let spec = ArdlSpec::new(1, 1);
        let a = bounds_test(&s, &spec, &params(199, 42), &Sequential).unwrap();
        let b = bounds_test(&s, &spec, &params(199, 42), &Sequential).unwrap();
        assert_eq!(a, b);
        let cv: Vec<f64> = a.decisions.iter().map(|d| d.critical_value).collect();
        assert!(cv[0] <= cv[1] && cv[1] <= cv[2]);
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
        for d in &a.decisions {
            assert_eq!(d.reject, a.f_stat > d.critical_value);
        }
    }

    #[test]
    fn cointegrated_pair_rejects() {
        let (x, y) = gen_cointegrated_pair(200, 0.5, 0.1, 4);
        let r = bounds_test(&sample(y, x), &ArdlSpec::new(1, 1), &params(199, 1), &Sequential).unwrap();
        assert!(r.decisions[..2].iter().all(|d| d.reject));
        assert!(r.narrative.contains("Reject the null hypothesis of no cointegration at the 5% level"));
    }

    #[test]
    fn ar_stationarity() {
        assert!(is_stationary_ar(&[]));
        assert!(is_stationary_ar(&[0.5]));
        assert!(is_stationary_ar(&[-0.99]));
        assert!(!is_stationary_ar(&[-1.2]));
        assert!(!is_stationary_ar(&[1.0]));
        // Roots 0.5 and 0.8: x_t = 1.3 x_{t-1} - 0.4 x_{t-2}.
        assert!(is_stationary_ar(&[1.3, -0.4]));
        // Roots 0.5 and 1.2.
        assert!(!is_stationary_ar(&[1.7, -0.6]));
        // Complex pair of modulus sqrt(0.9).
        assert!(is_stationary_ar(&[0.0, -0.9]));
        assert!(!is_stationary_ar(&[0.0, -1.1]));
    }

    #[test]
    fn decision_rule_extremes() {
        let cv = [(0.90, 2.0), (0.95, 3.0), (0.99, 5.0)];
        assert!(decide(1.0, &cv).iter().all(|d| !d.reject));
        assert!(decide(6.0, &cv).iter().all(|d| d.reject));
        let text = narrative(1.0, &decide(1.0, &cv));
        assert_eq!(text.matches("Fail to reject").count(), 3);
    }

    #[test]
    fn summed_form_is_single_restriction() {
        let s = sample(gen_random_walk(50, 5), gen_white_noise(50, 6));
        let w = summed_f_statistic(&s, &ArdlSpec::new(1, 1)).unwrap();
        assert_eq!(w.df1, 1);
        assert!(w.f_stat >= 0.0);
    }

    #[test]
    fn bootstrap_keeps_presample_and_matches_null_fit() {
        // Drawing the fitted residuals in order must reproduce the data.
        let s = sample(gen_random_walk(30, 7), gen_random_walk(30, 8));
        let spec = ArdlSpec::new(2, 1);
        let first = build_ecm_design(&s, &spec, None).unwrap().first_row;
        let null_terms = ecm_terms(&s, &spec, LevelTerms::None);
        let null = terms::build(&s, &null_terms, Response::Diff, first, None).unwrap();
        let fit = ols_fit(&null.design, &null.response).unwrap();
        let rebuilt = rebuild_dependent(&s, &null, &fit.coef, &fit.residuals);
        let y = &s.segments()[0].dependent().values;
        for (a, b) in rebuilt[0].iter().zip(y) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
