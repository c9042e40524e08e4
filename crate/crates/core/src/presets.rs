//! Research-question presets: which indicator explains which.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// A single-regressor sub-model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: String,
    pub dependent: String,
    pub regressor: String,
    /// Regressor as printed in the hypothesis table when it differs from
    /// the one named in the hypothesis text.
    pub table_regressor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RqPreset {
    pub name: String,
    pub dependent: String,
    pub regressors: Vec<String>,
    pub hypotheses: Vec<Hypothesis>,
}

impl RqPreset {
    pub fn regressor_refs(&self) -> Vec<&str> {
        self.regressors.iter().map(String::as_str).collect()
    }

    /// Human-readable notes for sub-models whose table entry differs from
    /// the text.
    pub fn discrepancies(&self) -> Vec<String> {
        self.hypotheses
            .iter()
            .filter_map(|h| {
                h.table_regressor.as_ref().map(|t| {
                    format!(
                        "{}: table lists {} on the right-hand side, text names {}; using {}",
                        h.id, t, h.regressor, h.regressor
                    )
                })
            })
            .collect()
    }
}

const LPI: [&str; 6] = ["LPI1", "LPI2", "LPI3", "LPI4", "LPI5", "LPI6"];

fn preset(
    name: &str,
    number: u8,
    dependent: &str,
    regressors: &[&str],
    table_override: Option<&str>,
) -> RqPreset {
    let hypotheses = regressors
        .iter()
        .enumerate()
        .map(|(i, r)| Hypothesis {
            id: format!("H{number}{}", (b'a' + i as u8) as char),
            dependent: dependent.into(),
            regressor: (*r).into(),
            table_regressor: table_override
                .filter(|t| t != r)
                .map(String::from),
        })
        .collect();
    RqPreset {
        name: name.into(),
        dependent: dependent.into(),
        regressors: regressors.iter().map(|r| String::from(*r)).collect(),
        hypotheses,
    }
}

/// The four research questions, in order.
pub fn all_presets() -> Vec<RqPreset> {
    alloc::vec![
        preset("RQ1", 1, "TRD", &LPI, Some("LPI1")),
        preset("RQ2", 2, "LPI3", &["TRD", "TRF"], None),
        preset("RQ3", 3, "ENS", &LPI, Some("LPI1")),
        preset("RQ4", 4, "ECG", &["ENS", "LPI1", "TRD", "LPI3", "TRF"], None),
    ]
}

/// Looks a preset up by name (`RQ1`..`RQ4`, case-insensitive).
pub fn preset_by_name(name: &str) -> Result<RqPreset> {
    all_presets()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| CoreError::NotFound {
            kind: "preset",
            name: name.into(),
        })
}
