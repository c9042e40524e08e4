use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::PanelTable;
use crate::stats::{quantile_linear, sorted};

/// Five-number summary plus mean of one indicator, missing cells excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let s = sorted(values);
        Some(Self {
            count: s.len(),
            min: s[0],
            q1: quantile_linear(&s, 0.25),
            median: quantile_linear(&s, 0.5),
            // summing in sorted order keeps the mean independent of row order
            mean: s.iter().sum::<f64>() / s.len() as f64,
            q3: quantile_linear(&s, 0.75),
            max: s[s.len() - 1],
        })
    }
}

/// Summary statistics per indicator over all entities and years. Indicators
/// with no observed value map to `None`.
pub fn describe(panel: &PanelTable) -> BTreeMap<String, Option<SummaryStats>> {
    panel
        .columns()
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let values: Vec<f64> = (0..panel.entities().len())
                .flat_map(|e| panel.series(e, c).iter().flatten().copied())
                .collect();
            (name.clone(), SummaryStats::from_values(&values))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Observation;
    use alloc::vec;

    #[test]
    fn constant_column() {
        let s = SummaryStats::from_values(&[7.0; 5]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.mean, s.q3, s.max), (7.0, 7.0, 7.0, 7.0, 7.0, 7.0));
    }

    #[test]
    fn four_values() {
        let s = SummaryStats::from_values(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
    }

    #[test]
    fn all_missing_indicator_is_absent() {
        let rows = vec![
            Observation { country: "USA".into(), indicator: "TRD".into(), year: 2007, value: Some(1.0) },
            Observation { country: "USA".into(), indicator: "TRF".into(), year: 2007, value: None },
        ];
        let panel = PanelTable::from_observations(rows, None).unwrap();
        let d = describe(&panel);
        assert!(d["TRD"].is_some());
        assert!(d["TRF"].is_none());
    }
}
