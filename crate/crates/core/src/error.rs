use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = CoreError> = core::result::Result<T, E>;

/// Errors raised by the estimation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("duplicate observation at record {index}: ({country}, {indicator}, {year})")]
    DuplicateObservation {
        index: usize,
        country: String,
        indicator: String,
        year: i32,
    },

    #[error("unknown indicator code `{code}` at record {index}")]
    UnknownIndicator { index: usize, code: String },

    #[error("year {year} at record {index} is outside {first}..={last}")]
    YearOutOfRange {
        index: usize,
        year: i32,
        first: i32,
        last: i32,
    },

    #[error("no observations for year {0}; the year index must be gap-free")]
    YearGap(i32),

    #[error("missing cells in requested slice: {}", format_holes(.0))]
    MissingCells(Vec<(String, i32)>),

    #[error("unknown {kind} `{name}`")]
    NotFound { kind: &'static str, name: String },

    #[error("insufficient sample: need more than {needed} rows, have {available}")]
    InsufficientSample { needed: usize, available: usize },

    #[error("design is rank deficient: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("column `{0}` has zero variance")]
    ConstantColumn(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("undefined result: {0}")]
    Undefined(String),
}

fn format_holes(holes: &[(String, i32)]) -> String {
    use core::fmt::Write;
    const SHOWN: usize = 8;
    let mut out = String::new();
    for (i, (name, year)) in holes.iter().take(SHOWN).enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "({name}, {year})");
    }
    if holes.len() > SHOWN {
        let _ = write!(out, " and {} more", holes.len() - SHOWN);
    }
    out
}

impl CoreError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the input data rather than the model.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            CoreError::DuplicateObservation { .. }
                | CoreError::UnknownIndicator { .. }
                | CoreError::YearOutOfRange { .. }
                | CoreError::YearGap(_)
                | CoreError::MissingCells(_)
                | CoreError::NotFound { .. }
                | CoreError::InvalidInput(_)
        )
    }
}
