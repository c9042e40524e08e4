//! Regressor terms evaluated over a (possibly pooled) estimation sample.
//!
//! A design is a list of [`Term`]s evaluated on every usable row of every
//! segment. Lags are taken within a segment, never across segments.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::frame::{AlignedSeriesSet, EstimationSample};
use crate::ols::DesignMatrix;

/// One design column, identified by role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum Term {
    Intercept,
    /// Indicator of segment `segment` (pooled samples with entity effects).
    EntityDummy { segment: usize },
    /// Linear time trend, 1 at each segment's first observation.
    Trend,
    /// `dY_{t-lag}`
    DepDiff { lag: usize },
    /// `dX_{j, t-lag}`
    RegDiff { regressor: usize, lag: usize },
    /// `Y_{t-lag}`
    DepLevel { lag: usize },
    /// `X_{j, t-lag}`
    RegLevel { regressor: usize, lag: usize },
    /// `X_{j, t-lag} - Y_{t-lag}`
    LevelGap { regressor: usize, lag: usize },
}

impl Term {
    /// Earliest in-segment time index at which the term is defined.
    pub fn first_available(&self) -> usize {
        match *self {
            Term::Intercept | Term::EntityDummy { .. } | Term::Trend => 0,
            Term::DepDiff { lag } | Term::RegDiff { lag, .. } => lag + 1,
            Term::DepLevel { lag } | Term::RegLevel { lag, .. } | Term::LevelGap { lag, .. } => lag,
        }
    }

    pub fn label(&self, sample: &EstimationSample) -> String {
        let dep = sample.dependent_name();
        let reg = |j: usize| sample.regressor_names()[j];
        match *self {
            Term::Intercept => String::from("(Intercept)"),
            Term::EntityDummy { segment } => format!("entity:{}", sample.segments()[segment].entity()),
            Term::Trend => String::from("trend"),
            Term::DepDiff { lag } => format!("d({dep})@{lag}"),
            Term::RegDiff { regressor, lag } => format!("d({})@{lag}", reg(regressor)),
            Term::DepLevel { lag } => format!("{dep}@{lag}"),
            Term::RegLevel { regressor, lag } => format!("{}@{lag}", reg(regressor)),
            Term::LevelGap { regressor, lag } => format!("{}-{dep}@{lag}", reg(regressor)),
        }
    }

    /// True for terms that belong to no single variable.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Term::Intercept | Term::EntityDummy { .. } | Term::Trend)
    }

    /// Value at in-segment time `t`; `dep` supplies the dependent series
    /// (possibly a bootstrap replacement).
    pub fn eval(&self, segment: usize, seg: &AlignedSeriesSet, dep: &[f64], t: usize) -> f64 {
        match *self {
            Term::Intercept => 1.0,
            Term::EntityDummy { segment: s } => f64::from(u8::from(s == segment)),
            Term::Trend => (t + 1) as f64,
            Term::DepDiff { lag } => dep[t - lag] - dep[t - lag - 1],
            Term::RegDiff { regressor, lag } => {
                let x = &seg.regressors()[regressor].values;
                x[t - lag] - x[t - lag - 1]
            }
            Term::DepLevel { lag } => dep[t - lag],
            Term::RegLevel { regressor, lag } => seg.regressors()[regressor].values[t - lag],
            Term::LevelGap { regressor, lag } => {
                seg.regressors()[regressor].values[t - lag] - dep[t - lag]
            }
        }
    }
}

/// What the regression explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// `Y_t`
    Level,
    /// `dY_t`
    Diff,
}

impl Response {
    fn first_available(self) -> usize {
        match self {
            Response::Level => 0,
            Response::Diff => 1,
        }
    }

    pub fn eval(self, dep: &[f64], t: usize) -> f64 {
        match self {
            Response::Level => dep[t],
            Response::Diff => dep[t] - dep[t - 1],
        }
    }
}

/// A design evaluated on a sample, with the row provenance needed to rebuild
/// it (bootstrap) or reorder it (diagnostics).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedDesign {
    pub design: DesignMatrix,
    pub response: Vec<f64>,
    pub terms: Vec<Term>,
    /// `(segment, in-segment time index)` of each row.
    pub rows: Vec<(usize, usize)>,
    /// Calendar year of each row.
    pub row_years: Vec<i32>,
    /// In-segment index of the first row.
    pub first_row: usize,
}

impl StackedDesign {
    /// Index of the first row of each segment within the stacked rows.
    pub fn segment_starts(&self) -> Vec<usize> {
        let mut starts = Vec::new();
        let mut last = None;
        for (i, (s, _)) in self.rows.iter().enumerate() {
            if last != Some(*s) {
                starts.push(i);
                last = Some(*s);
            }
        }
        starts
    }
}

/// Minimum usable first row for `terms` and `response`.
pub fn first_usable_row(terms: &[Term], response: Response) -> usize {
    terms
        .iter()
        .map(Term::first_available)
        .chain(core::iter::once(response.first_available()))
        .max()
        .unwrap_or(0)
}

/// Evaluates `terms` on rows `first_row..len` of each segment.
pub fn build(
    sample: &EstimationSample,
    terms: &[Term],
    response: Response,
    first_row: usize,
    dep_override: Option<&[Vec<f64>]>,
) -> Result<StackedDesign> {
    let needed = first_usable_row(terms, response);
    if first_row < needed {
        return Err(CoreError::InvalidInput(format!(
            "first row {first_row} precedes the earliest usable row {needed}"
        )));
    }
    let mut columns: Vec<Vec<f64>> = terms.iter().map(|_| Vec::new()).collect();
    let mut y = Vec::new();
    let mut rows = Vec::new();
    let mut row_years = Vec::new();
    for (s, seg) in sample.segments().iter().enumerate() {
        let dep: &[f64] = match dep_override {
            Some(d) => &d[s],
            None => &seg.dependent().values,
        };
        for t in first_row..seg.len() {
            for (col, term) in columns.iter_mut().zip(terms) {
                col.push(term.eval(s, seg, dep, t));
            }
            y.push(response.eval(dep, t));
            rows.push((s, t));
            row_years.push(seg.years()[t]);
        }
    }
    if rows.len() <= terms.len() {
        return Err(CoreError::InsufficientSample {
            needed: terms.len(),
            available: rows.len(),
        });
    }
    let names = terms.iter().map(|t| t.label(sample)).collect();
    let intercept = terms.first() == Some(&Term::Intercept);
    let design = DesignMatrix::new(names, columns, intercept)?;
    Ok(StackedDesign {
        design,
        response: y,
        terms: terms.to_vec(),
        rows,
        row_years,
        first_row,
    })
}

/// Entity dummies for a pooled sample with entity effects. With an
/// intercept the first segment is the baseline and gets no dummy.
pub fn entity_dummies(sample: &EstimationSample, enabled: bool, intercept: bool) -> Vec<Term> {
    if !enabled || sample.segments().len() < 2 {
        return Vec::new();
    }
    (usize::from(intercept)..sample.segments().len())
        .map(|segment| Term::EntityDummy { segment })
        .collect()
}
