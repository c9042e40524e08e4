//! Finite distributed-lag regression and backward elimination of
//! insignificant terms.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::frame::EstimationSample;
use crate::ols::{ols_fit, DesignMatrix, OlsFit};
use crate::terms::{self, Response, Term};

/// Lag structure of a distributed-lag model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlmSpec {
    /// Uniform lag order applied to every regressor.
    pub q: usize,
    /// Per-regressor lag orders overriding `q`, in regressor order.
    #[serde(default)]
    pub per_regressor: Option<Vec<usize>>,
    #[serde(default = "default_true")]
    pub include_intercept: bool,
    /// Entity dummies for pooled samples.
    #[serde(default)]
    pub entity_effects: bool,
}

fn default_true() -> bool {
    true
}

impl Default for DlmSpec {
    fn default() -> Self {
        Self {
            q: 2,
            per_regressor: None,
            include_intercept: true,
            entity_effects: false,
        }
    }
}

impl DlmSpec {
    pub fn uniform(q: usize) -> Self {
        Self {
            q,
            ..Self::default()
        }
    }

    fn lag_orders(&self, nregressors: usize) -> Result<Vec<usize>> {
        match &self.per_regressor {
            Some(v) if v.len() != nregressors => Err(CoreError::param(
                "per_regressor",
                alloc::format!("{} lag orders for {nregressors} regressors", v.len()),
            )),
            Some(v) => Ok(v.clone()),
            None => Ok(alloc::vec![self.q; nregressors]),
        }
    }
}

/// How backward elimination removes terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropMode {
    /// One lag term at a time.
    #[default]
    Term,
    /// All lags of a regressor at once; a regressor survives while any of its
    /// lags is significant.
    WholeSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlmFit {
    pub fit: OlsFit,
    /// Labels of the form `X@lag`, aligned with the fit's coefficients.
    pub labels: Vec<String>,
    pub terms: Vec<Term>,
    pub reduced: bool,
    /// Dropped labels in removal order.
    pub dropped: Vec<String>,
    /// Only deterministic terms remain after reduction.
    pub intercept_only: bool,
    design: DesignMatrix,
    response: Vec<f64>,
}

impl DlmFit {
    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn coefficient(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.fit.coef[i])
    }
}

/// Regresses `Y_t` on `X_{j, t-i}` for `i = 0..=q_j` over the rows where all
/// lags exist.
pub fn fit_dlm(sample: &EstimationSample, spec: &DlmSpec) -> Result<DlmFit> {
    let nreg = sample.nregressors();
    if nreg == 0 {
        return Err(CoreError::param("regressors", "a distributed-lag model needs at least one regressor"));
    }
    let lags = spec.lag_orders(nreg)?;
    let mut terms = Vec::new();
    if spec.include_intercept {
        terms.push(Term::Intercept);
    }
    terms.extend(terms::entity_dummies(sample, spec.entity_effects, spec.include_intercept));
    for (regressor, &q) in lags.iter().enumerate() {
        terms.extend((0..=q).map(|lag| Term::RegLevel { regressor, lag }));
    }
    let first_row = terms::first_usable_row(&terms, Response::Level);
    let stacked = terms::build(sample, &terms, Response::Level, first_row, None)?;
    let fit = ols_fit(&stacked.design, &stacked.response)?;
    Ok(DlmFit {
        labels: stacked.design.names().to_vec(),
        terms: stacked.terms,
        fit,
        reduced: false,
        dropped: Vec::new(),
        intercept_only: false,
        design: stacked.design,
        response: stacked.response,
    })
}

/// Outcome of backward elimination on a fixed design and response.
#[derive(Debug, Clone, PartialEq)]
pub struct Elimination {
    pub fit: OlsFit,
    pub design: DesignMatrix,
    /// Original column indices kept, ascending.
    pub kept: Vec<usize>,
    /// Dropped labels in removal order.
    pub dropped: Vec<String>,
}

/// Repeatedly drops the least significant unprotected column (largest
/// p-value above `alpha`, ties to the lexicographically smallest label) and
/// refits on the same rows. Whole-series removal groups columns by the label
/// part before `@`.
pub fn backward_eliminate(
    design: &DesignMatrix,
    response: &[f64],
    protected: &[bool],
    alpha: f64,
    mode: DropMode,
) -> Result<Elimination> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CoreError::param("alpha", "significance level must lie in [0, 1]"));
    }
    if protected.len() != design.ncols() {
        return Err(CoreError::InvalidInput("protection mask does not match the design".into()));
    }
    let mut kept: Vec<usize> = (0..design.ncols()).collect();
    let mut current = design.clone();
    let mut fit = ols_fit(&current, response)?;
    let mut dropped = Vec::new();
    loop {
        let labels = current.names();
        let prot: Vec<bool> = kept.iter().map(|&i| protected[i]).collect();
        let drop = match mode {
            DropMode::Term => worst_term(labels, &fit.p_values, &prot, alpha),
            DropMode::WholeSeries => worst_series(labels, &fit.p_values, &prot, alpha),
        };
        let Some(drop) = drop else { break };
        if drop.len() == kept.len() {
            break;
        }
        dropped.extend(drop.iter().map(|&i| labels[i].clone()));
        let next = current.select_columns(|j| !drop.contains(&j))?;
        kept = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| !drop.contains(j))
            .map(|(_, &i)| i)
            .collect();
        fit = ols_fit(&next, response)?;
        current = next;
    }
    Ok(Elimination {
        fit,
        design: current,
        kept,
        dropped,
    })
}

/// Backward elimination of distributed-lag terms; deterministic terms are
/// never dropped.
pub fn reduce_model(fit: &DlmFit, alpha: f64, mode: DropMode) -> Result<DlmFit> {
    let protected: Vec<bool> = fit.terms.iter().map(Term::is_deterministic).collect();
    let e = backward_eliminate(&fit.design, &fit.response, &protected, alpha, mode)?;
    let terms: Vec<Term> = e.kept.iter().map(|&i| fit.terms[i]).collect();
    let mut dropped = fit.dropped.clone();
    dropped.extend(e.dropped);
    Ok(DlmFit {
        labels: e.design.names().to_vec(),
        intercept_only: terms.iter().all(Term::is_deterministic),
        terms,
        fit: e.fit,
        reduced: true,
        dropped,
        design: e.design,
        response: fit.response.clone(),
    })
}

fn worst_term(labels: &[String], p_values: &[f64], protected: &[bool], alpha: f64) -> Option<Vec<usize>> {
    let mut best: Option<usize> = None;
    for (i, &p) in p_values.iter().enumerate() {
        if protected[i] || !(p > alpha) {
            continue;
        }
        best = match best {
            Some(b) if !(p > p_values[b] || (p == p_values[b] && labels[i] < labels[b])) => Some(b),
            _ => Some(i),
        };
    }
    best.map(|i| alloc::vec![i])
}

fn series_name(label: &str) -> &str {
    label.rsplit_once('@').map_or(label, |(name, _)| name)
}

fn worst_series(labels: &[String], p_values: &[f64], protected: &[bool], alpha: f64) -> Option<Vec<usize>> {
    // (min p over the series' lags, series name, column indices)
    let mut groups: Vec<(f64, &str, Vec<usize>)> = Vec::new();
    for (i, &p) in p_values.iter().enumerate() {
        if protected[i] {
            continue;
        }
        let name = series_name(&labels[i]);
        match groups.iter_mut().find(|g| g.1 == name) {
            Some(g) => {
                g.0 = g.0.min(p);
                g.2.push(i);
            }
            None => groups.push((p, name, alloc::vec![i])),
        }
    }
    groups
        .into_iter()
        .filter(|g| g.0 > alpha)
        .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| b.1.cmp(a.1)))
        .map(|g| g.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::gen_white_noise;
    use crate::frame::AlignedSeriesSet;

    fn sample(y: Vec<f64>, x: Vec<f64>) -> EstimationSample {
        AlignedSeriesSet::from_vectors(("Y", y), alloc::vec![("X", x)])
            .unwrap()
            .into()
    }

    #[test]
    fn contemporaneous_identity() {
        let x = gen_white_noise(30, 1);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = fit_dlm(&sample(y, x), &DlmSpec::uniform(1)).unwrap();
        assert!((fit.coefficient("X@0").unwrap() - 2.0).abs() < 1e-10);
        assert!(fit.coefficient("X@1").unwrap().abs() < 1e-10);
        assert!((fit.fit.r2 - 1.0).abs() < 1e-10);
        assert_eq!(fit.labels.len(), 1 + 2);
    }

    #[test]
    fn pure_lag_identity() {
        let x = gen_white_noise(30, 2);
        let mut y = alloc::vec![0.0];
        y.extend_from_slice(&x[..29]);
        let fit = fit_dlm(&sample(y, x), &DlmSpec::uniform(2)).unwrap();
        assert!((fit.coefficient("X@1").unwrap() - 1.0).abs() < 1e-10);
        assert!(fit.coefficient("X@0").unwrap().abs() < 1e-10);
        assert!(fit.coefficient("X@2").unwrap().abs() < 1e-10);
    }

    #[test]
    fn alpha_one_drops_nothing() {
        let x = gen_white_noise(40, 3);
        let y = gen_white_noise(40, 4);
        let fit = fit_dlm(&sample(y, x), &DlmSpec::uniform(2)).unwrap();
        let reduced = reduce_model(&fit, 1.0, DropMode::Term).unwrap();
        assert!(reduced.dropped.is_empty());
        assert_eq!(reduced.fit.coef, fit.fit.coef);
    }

    #[test]
    fn significant_terms_are_a_fixed_point() {
        let x = gen_white_noise(60, 5);
        let e = gen_white_noise(60, 6);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| 3.0 * a + 0.01 * b).collect();
        let fit = fit_dlm(&sample(y, x), &DlmSpec::uniform(0)).unwrap();
        let reduced = reduce_model(&fit, 0.05, DropMode::Term).unwrap();
        assert!(reduced.dropped.is_empty());
        assert_eq!(reduced.labels, fit.labels);
    }

    #[test]
    fn noise_reduces_to_intercept_only() {
        let x = gen_white_noise(40, 7);
        let y: Vec<f64> = (0..40).map(|i| 5.0 + if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let fit = fit_dlm(&sample(y, x), &DlmSpec::uniform(1)).unwrap();
        let reduced = reduce_model(&fit, 1e-12, DropMode::WholeSeries).unwrap();
        assert!(reduced.intercept_only);
        assert_eq!(reduced.labels, alloc::vec![String::from("(Intercept)")]);
        assert_eq!(reduced.dropped.len(), 2);
    }

    #[test]
    fn term_count_matches_lags() {
        let x = gen_white_noise(40, 8);
        let z = gen_white_noise(40, 9);
        let y = gen_white_noise(40, 10);
        let s: EstimationSample =
            AlignedSeriesSet::from_vectors(("Y", y), alloc::vec![("X", x), ("Z", z)])
                .unwrap()
                .into();
        let spec = DlmSpec { per_regressor: Some(alloc::vec![1, 3]), ..DlmSpec::default() };
        let fit = fit_dlm(&s, &spec).unwrap();
        assert_eq!(fit.labels.len(), (1 + 1) + (3 + 1) + 1);
        assert_eq!(fit.fit.nobs, 40 - 3);
    }
}
