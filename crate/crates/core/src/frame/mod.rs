//! Indicator panels: storage, alignment into model-ready series, and the
//! lag/difference operators.

mod describe;
pub mod indicators;
mod transform;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub use describe::{describe, SummaryStats};
pub use indicators::{IndicatorInfo, IndicatorMap, UnknownCodePolicy};
pub use transform::{diff, diff_padded, lag, lag_masked};

/// One `(country, indicator, year)` cell. `None` marks a missing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub country: String,
    pub indicator: String,
    pub year: i32,
    pub value: Option<f64>,
}

/// Inclusive year window accepted on ingest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub first: i32,
    pub last: i32,
}

impl YearRange {
    pub fn contains(&self, year: i32) -> bool {
        (self.first..=self.last).contains(&year)
    }
}

/// Country codes are three ASCII letters or digits, upper case.
pub fn is_valid_country_code(code: &str) -> bool {
    code.len() == 3
        && code
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit())
}

/// Country x indicator x year panel with an explicit missing mask.
///
/// Entities and indicator columns are kept sorted, and the year axis is a
/// gap-free run of consecutive years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelTable {
    entities: Vec<String>,
    years: Vec<i32>,
    columns: Vec<String>,
    // index: (entity * ncols + column) * nyears + year
    cells: Vec<Option<f64>>,
}

impl PanelTable {
    /// Builds a panel from observations. `index` in errors is the position of
    /// the offending observation in the input sequence.
    pub fn from_observations<I>(observations: I, range: Option<YearRange>) -> Result<Self>
    where
        I: IntoIterator<Item = Observation>,
    {
        let mut seen: BTreeMap<(String, String, i32), Option<f64>> = BTreeMap::new();
        for (index, obs) in observations.into_iter().enumerate() {
            if !is_valid_country_code(&obs.country) {
                return Err(CoreError::InvalidInput(format!(
                    "record {index}: country `{}` is not a 3-letter code",
                    obs.country
                )));
            }
            if obs.indicator.is_empty() {
                return Err(CoreError::InvalidInput(format!("record {index}: empty indicator")));
            }
            if let Some(v) = obs.value {
                if !v.is_finite() {
                    return Err(CoreError::InvalidInput(format!(
                        "record {index}: value is not finite"
                    )));
                }
            }
            if let Some(r) = range {
                if !r.contains(obs.year) {
                    return Err(CoreError::YearOutOfRange {
                        index,
                        year: obs.year,
                        first: r.first,
                        last: r.last,
                    });
                }
            }
            let key = (obs.country, obs.indicator, obs.year);
            if seen.contains_key(&key) {
                let (country, indicator, year) = key;
                return Err(CoreError::DuplicateObservation {
                    index,
                    country,
                    indicator,
                    year,
                });
            }
            seen.insert(key, obs.value);
        }
        if seen.is_empty() {
            return Err(CoreError::InvalidInput("panel has no observations".into()));
        }

        let entities: Vec<String> = seen
            .keys()
            .map(|(c, _, _)| c.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let columns: Vec<String> = seen
            .keys()
            .map(|(_, i, _)| i.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let year_set: BTreeSet<i32> = seen.keys().map(|(_, _, y)| *y).collect();
        let first = *year_set.first().expect("non-empty");
        let last = *year_set.last().expect("non-empty");
        if let Some(gap) = (first..=last).find(|y| !year_set.contains(y)) {
            return Err(CoreError::YearGap(gap));
        }
        let years: Vec<i32> = (first..=last).collect();

        let mut panel = Self {
            cells: vec![None; entities.len() * columns.len() * years.len()],
            entities,
            years,
            columns,
        };
        for ((country, indicator, year), value) in seen {
            let e = panel.entity_index(&country).expect("collected");
            let c = panel.column_index(&indicator).expect("collected");
            let y = (year - first) as usize;
            let idx = panel.offset(e, c, y);
            panel.cells[idx] = value;
        }
        Ok(panel)
    }

    /// Assembles a panel from its parts; `cells` is indexed
    /// `(entity * ncols + column) * nyears + year`.
    pub fn from_parts(
        entities: Vec<String>,
        first_year: i32,
        nyears: usize,
        columns: Vec<String>,
        cells: Vec<Option<f64>>,
    ) -> Result<Self> {
        if cells.len() != entities.len() * columns.len() * nyears || nyears == 0 {
            return Err(CoreError::InvalidInput("cell count does not match panel shape".into()));
        }
        let unique = |v: &[String]| v.iter().collect::<BTreeSet<_>>().len() == v.len();
        if !unique(&entities) || !unique(&columns) {
            return Err(CoreError::InvalidInput("duplicate entity or column".into()));
        }
        if cells.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite cell value".into()));
        }
        Ok(Self {
            entities,
            years: (first_year..first_year + nyears as i32).collect(),
            columns,
            cells,
        })
    }

    fn offset(&self, entity: usize, column: usize, year: usize) -> usize {
        (entity * self.columns.len() + column) * self.years.len() + year
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn entity_index(&self, entity: &str) -> Option<usize> {
        self.entities.binary_search_by(|e| e.as_str().cmp(entity)).ok()
    }

    pub fn column_index(&self, column: &str) -> Option<usize> {
        self.columns.binary_search_by(|c| c.as_str().cmp(column)).ok()
    }

    pub fn year_index(&self, year: i32) -> Option<usize> {
        let first = *self.years.first()?;
        let idx = year.checked_sub(first)?;
        (idx >= 0 && (idx as usize) < self.years.len()).then_some(idx as usize)
    }

    pub fn cell(&self, entity: usize, column: usize, year: usize) -> Option<f64> {
        self.cells[self.offset(entity, column, year)]
    }

    pub fn get(&self, entity: &str, column: &str, year: i32) -> Option<f64> {
        let e = self.entity_index(entity)?;
        let c = self.column_index(column)?;
        let y = self.year_index(year)?;
        self.cell(e, c, y)
    }

    /// The year-ordered cells of one entity and indicator.
    pub fn series(&self, entity: usize, column: usize) -> &[Option<f64>] {
        let start = self.offset(entity, column, 0);
        &self.cells[start..start + self.years.len()]
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// All cells as observations, ordered by entity, indicator, year.
    pub fn observations(&self) -> impl Iterator<Item = Observation> + '_ {
        self.entities.iter().enumerate().flat_map(move |(e, entity)| {
            self.columns.iter().enumerate().flat_map(move |(c, column)| {
                self.years.iter().enumerate().map(move |(y, &year)| Observation {
                    country: entity.clone(),
                    indicator: column.clone(),
                    year,
                    value: self.cell(e, c, y),
                })
            })
        })
    }

    fn require_column(&self, key: &str) -> Result<usize> {
        self.column_index(key).ok_or_else(|| CoreError::NotFound {
            kind: "indicator",
            name: key.into(),
        })
    }
}

/// A named, fully observed series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub name: String,
    pub values: Vec<f64>,
}

impl NamedSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// A dependent series and its regressors on a shared, complete year index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSeriesSet {
    entity: String,
    years: Vec<i32>,
    dependent: NamedSeries,
    regressors: Vec<NamedSeries>,
}

impl AlignedSeriesSet {
    pub fn new(
        entity: impl Into<String>,
        years: Vec<i32>,
        dependent: NamedSeries,
        regressors: Vec<NamedSeries>,
    ) -> Result<Self> {
        let n = years.len();
        if n < 3 {
            return Err(CoreError::InsufficientSample {
                needed: 2,
                available: n,
            });
        }
        if years.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(CoreError::InvalidInput("time index must be consecutive".into()));
        }
        let mut names = BTreeSet::new();
        for s in core::iter::once(&dependent).chain(&regressors) {
            if !names.insert(s.name.as_str()) {
                return Err(CoreError::InvalidInput(format!("duplicate series `{}`", s.name)));
            }
            if s.values.len() != n {
                return Err(CoreError::InvalidInput(format!(
                    "series `{}` has {} values, expected {n}",
                    s.name,
                    s.values.len()
                )));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::InvalidInput(format!(
                    "series `{}` has non-finite values",
                    s.name
                )));
            }
        }
        Ok(Self {
            entity: entity.into(),
            years,
            dependent,
            regressors,
        })
    }

    /// Convenience constructor with a synthetic `1..=n` time index.
    pub fn from_vectors(
        dependent: (&str, Vec<f64>),
        regressors: Vec<(&str, Vec<f64>)>,
    ) -> Result<Self> {
        let n = dependent.1.len();
        Self::new(
            "SIM",
            (1..=n as i32).collect(),
            NamedSeries::new(dependent.0, dependent.1),
            regressors
                .into_iter()
                .map(|(name, v)| NamedSeries::new(name, v))
                .collect(),
        )
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn dependent(&self) -> &NamedSeries {
        &self.dependent
    }

    pub fn regressors(&self) -> &[NamedSeries] {
        &self.regressors
    }

    pub fn regressor_names(&self) -> Vec<&str> {
        self.regressors.iter().map(|r| r.name.as_str()).collect()
    }

    /// Same set with the dependent values replaced.
    pub fn with_dependent_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(
            self.entity.clone(),
            self.years.clone(),
            NamedSeries::new(self.dependent.name.clone(), values),
            self.regressors.clone(),
        )
    }

    /// Subset of regressors, in the requested order.
    pub fn select_regressors(&self, names: &[&str]) -> Result<Self> {
        let regressors = names
            .iter()
            .map(|name| {
                self.regressors
                    .iter()
                    .find(|r| r.name == *name)
                    .cloned()
                    .ok_or_else(|| CoreError::NotFound {
                        kind: "regressor",
                        name: (*name).into(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.entity.clone(), self.years.clone(), self.dependent.clone(), regressors)
    }
}

/// One or more aligned segments estimated as a single stacked regression.
/// Lags and differences never cross segment boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSample {
    segments: Vec<AlignedSeriesSet>,
}

impl EstimationSample {
    pub fn single(set: AlignedSeriesSet) -> Self {
        Self {
            segments: vec![set],
        }
    }

    /// Pools segments that share the same dependent and regressor names.
    pub fn pooled(segments: Vec<AlignedSeriesSet>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| CoreError::InvalidInput("no segments to pool".into()))?;
        let dep = first.dependent.name.clone();
        let regs: Vec<String> = first.regressors.iter().map(|r| r.name.clone()).collect();
        for s in &segments[1..] {
            let same = s.dependent.name == dep
                && s.regressors.len() == regs.len()
                && s.regressors.iter().zip(&regs).all(|(a, b)| &a.name == b);
            if !same {
                return Err(CoreError::InvalidInput(format!(
                    "segment `{}` has different variables",
                    s.entity
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[AlignedSeriesSet] {
        &self.segments
    }

    pub fn dependent_name(&self) -> &str {
        &self.segments[0].dependent.name
    }

    pub fn regressor_names(&self) -> Vec<&str> {
        self.segments[0].regressor_names()
    }

    pub fn nregressors(&self) -> usize {
        self.segments[0].regressors.len()
    }

    pub fn total_len(&self) -> usize {
        self.segments.iter().map(AlignedSeriesSet::len).sum()
    }

    /// Replaces each segment's dependent values.
    pub fn with_dependent_values(&self, values: Vec<Vec<f64>>) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .zip(values)
            .map(|(s, v)| s.with_dependent_values(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { segments })
    }

    pub fn select_regressors(&self, names: &[&str]) -> Result<Self> {
        let segments = self
            .segments
            .iter()
            .map(|s| s.select_regressors(names))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { segments })
    }
}

impl From<AlignedSeriesSet> for EstimationSample {
    fn from(set: AlignedSeriesSet) -> Self {
        Self::single(set)
    }
}

/// Extracts one entity's dependent and regressor series over the full year
/// index. Any missing cell in the slice is an error listing every hole.
pub fn align_panel(
    panel: &PanelTable,
    entity: &str,
    dependent: &str,
    regressors: &[&str],
) -> Result<AlignedSeriesSet> {
    let e = panel.entity_index(entity).ok_or_else(|| CoreError::NotFound {
        kind: "entity",
        name: entity.into(),
    })?;
    let mut holes = Vec::new();
    let mut take = |key: &str| -> Result<NamedSeries> {
        let c = panel.require_column(key)?;
        let mut values = Vec::with_capacity(panel.years.len());
        for (y, cell) in panel.series(e, c).iter().enumerate() {
            match cell {
                Some(v) => values.push(*v),
                None => {
                    holes.push((String::from(key), panel.years[y]));
                    values.push(f64::NAN);
                }
            }
        }
        Ok(NamedSeries::new(key, values))
    };
    let dep = take(dependent)?;
    let regs = regressors
        .iter()
        .map(|k| take(k))
        .collect::<Result<Vec<_>>>()?;
    if !holes.is_empty() {
        return Err(CoreError::MissingCells(holes));
    }
    AlignedSeriesSet::new(entity, panel.years.clone(), dep, regs)
}

/// Aligns every entity and pools them into one estimation sample.
pub fn align_pooled(
    panel: &PanelTable,
    dependent: &str,
    regressors: &[&str],
) -> Result<EstimationSample> {
    let mut segments = Vec::new();
    let mut holes = Vec::new();
    for entity in &panel.entities {
        match align_panel(panel, entity, dependent, regressors) {
            Ok(set) => segments.push(set),
            Err(CoreError::MissingCells(h)) => holes.extend(
                h.into_iter()
                    .map(|(key, year)| (format!("{key}@{entity}"), year)),
            ),
            Err(other) => return Err(other),
        }
    }
    if !holes.is_empty() {
        return Err(CoreError::MissingCells(holes));
    }
    EstimationSample::pooled(segments)
}

/// Cross-entity mean of each requested indicator per year, as a single
/// series set labelled `MEAN`. Years where an indicator has no observed value
/// in any entity are holes.
pub fn cross_section_mean(
    panel: &PanelTable,
    dependent: &str,
    regressors: &[&str],
) -> Result<AlignedSeriesSet> {
    let mut holes = Vec::new();
    let mut take = |key: &str| -> Result<NamedSeries> {
        let c = panel.require_column(key)?;
        let values = (0..panel.years.len())
            .map(|y| {
                let mut sum = 0.0;
                let mut count = 0usize;
                for e in 0..panel.entities.len() {
                    if let Some(v) = panel.cell(e, c, y) {
                        sum += v;
                        count += 1;
                    }
                }
                if count == 0 {
                    holes.push((String::from(key), panel.years[y]));
                    f64::NAN
                } else {
                    sum / count as f64
                }
            })
            .collect();
        Ok(NamedSeries::new(key, values))
    };
    let dep = take(dependent)?;
    let regs = regressors
        .iter()
        .map(|k| take(k))
        .collect::<Result<Vec<_>>>()?;
    if !holes.is_empty() {
        return Err(CoreError::MissingCells(holes));
    }
    AlignedSeriesSet::new("MEAN", panel.years.clone(), dep, regs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(country: &str, indicator: &str, year: i32, value: Option<f64>) -> Observation {
        Observation {
            country: country.into(),
            indicator: indicator.into(),
            year,
            value,
        }
    }

    #[test]
    fn builds_single_series_panel() {
        let rows = (2007..=2010).map(|y| obs("USA", "TRD", y, Some(f64::from(y - 2000))));
        let panel = PanelTable::from_observations(rows, None).unwrap();
        assert_eq!(panel.entities().len(), 1);
        assert_eq!(panel.columns().len(), 1);
        assert_eq!(panel.years().len(), 4);
        assert_eq!(panel.get("USA", "TRD", 2009), Some(9.0));
    }

    #[test]
    fn empty_value_is_missing() {
        let rows = [
            obs("USA", "TRD", 2007, Some(1.0)),
            obs("USA", "TRD", 2008, None),
            obs("USA", "TRD", 2009, Some(3.0)),
        ];
        let panel = PanelTable::from_observations(rows, None).unwrap();
        assert_eq!(panel.missing_count(), 1);
    }

    #[test]
    fn duplicate_names_second_record() {
        let rows = [
            obs("DEU", "LPI1", 2012, Some(4.0)),
            obs("DEU", "LPI1", 2013, Some(4.1)),
            obs("DEU", "LPI1", 2012, Some(4.2)),
        ];
        let err = PanelTable::from_observations(rows, None).unwrap_err();
        assert!(matches!(err, CoreError::DuplicateObservation { index: 2, year: 2012, .. }));
    }

    #[test]
    fn year_gap_rejected() {
        let rows = [obs("DEU", "LPI1", 2012, Some(4.0)), obs("DEU", "LPI1", 2014, Some(4.1))];
        assert_eq!(
            PanelTable::from_observations(rows, None).unwrap_err(),
            CoreError::YearGap(2013)
        );
    }

    #[test]
    fn year_range_enforced() {
        let rows = [obs("DEU", "LPI1", 2006, Some(4.0))];
        let range = YearRange { first: 2007, last: 2023 };
        assert!(matches!(
            PanelTable::from_observations(rows, Some(range)),
            Err(CoreError::YearOutOfRange { year: 2006, .. })
        ));
    }

    fn full_panel() -> PanelTable {
        let mut rows = Vec::new();
        for (i, key) in ["TRD", "LPI1", "LPI3"].iter().enumerate() {
            for y in 0..16 {
                rows.push(obs("BRA", key, 2007 + y, Some(f64::from(y) * (i as f64 + 1.0))));
            }
        }
        PanelTable::from_observations(rows, None).unwrap()
    }

    #[test]
    fn align_complete_slice_in_request_order() {
        let panel = full_panel();
        let set = align_panel(&panel, "BRA", "TRD", &["LPI3", "LPI1"]).unwrap();
        assert_eq!(set.len(), 16);
        assert_eq!(set.regressor_names(), vec!["LPI3", "LPI1"]);
        assert_eq!(set.regressors()[0].values[2], 6.0);
    }

    #[test]
    fn align_reports_holes() {
        let mut rows: Vec<Observation> = full_panel().observations().collect();
        for r in rows.iter_mut() {
            if r.indicator == "TRD" && r.year == 2011 {
                r.value = None;
            }
        }
        let panel = PanelTable::from_observations(rows, None).unwrap();
        let err = align_panel(&panel, "BRA", "TRD", &["LPI1"]).unwrap_err();
        assert_eq!(err, CoreError::MissingCells(vec![("TRD".into(), 2011)]));
    }

    #[test]
    fn pooled_requires_matching_names() {
        let a = AlignedSeriesSet::from_vectors(("Y", vec![1.0, 2.0, 3.0]), vec![("X", vec![0.0, 1.0, 0.5])])
            .unwrap();
        let b = AlignedSeriesSet::from_vectors(("Y", vec![1.0, 2.0, 3.0]), vec![("Z", vec![0.0, 1.0, 0.5])])
            .unwrap();
        assert!(EstimationSample::pooled(vec![a.clone(), a.clone()]).is_ok());
        assert!(EstimationSample::pooled(vec![a, b]).is_err());
    }

    #[test]
    fn cross_section_mean_averages_entities() {
        let rows = [
            obs("AAA", "TRD", 2000, Some(1.0)),
            obs("BBB", "TRD", 2000, Some(3.0)),
            obs("AAA", "TRD", 2001, Some(2.0)),
            obs("BBB", "TRD", 2001, None),
            obs("AAA", "TRD", 2002, Some(5.0)),
            obs("BBB", "TRD", 2002, Some(7.0)),
        ];
        let panel = PanelTable::from_observations(rows, None).unwrap();
        let set = cross_section_mean(&panel, "TRD", &[]).unwrap();
        assert_eq!(set.dependent().values, vec![2.0, 2.0, 6.0]);
    }
}
