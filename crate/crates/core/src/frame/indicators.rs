//! World Bank indicator codes and the short variable keys used in models.

use alloc::string::String;
use alloc::vec::Vec;

/// Versioned code map shipped with the crate (tab-separated
/// `code key description`, `#` comments).
pub const INDICATOR_MAP_V1: &str = include_str!("../../resources/indicators-v1.txt");

/// One entry of the code map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorInfo {
    pub code: String,
    pub key: String,
    pub description: String,
}

/// What to do with codes that are not in the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownCodePolicy {
    #[default]
    Reject,
    /// Keep the raw code as the variable key.
    PassThrough,
}

#[derive(Debug, Clone)]
pub struct IndicatorMap {
    version: u32,
    entries: Vec<IndicatorInfo>,
}

impl IndicatorMap {
    pub fn builtin() -> Self {
        Self::parse(INDICATOR_MAP_V1, 1)
    }

    pub fn parse(text: &str, version: u32) -> Self {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|line| {
                let mut parts = line.splitn(3, '\t');
                let code = parts.next()?.trim();
                let key = parts.next()?.trim();
                let description = parts.next().unwrap_or("").trim();
                Some(IndicatorInfo {
                    code: code.into(),
                    key: key.into(),
                    description: description.into(),
                })
            })
            .collect();
        Self { version, entries }
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn entries(&self) -> &[IndicatorInfo] {
        &self.entries
    }

    /// Resolves either a raw code (`LP.LPI.OVRL.XQ`) or a variable key
    /// (`LPI1`, case-insensitive) to the canonical key.
    pub fn resolve(&self, code_or_key: &str) -> Option<&str> {
        let needle = code_or_key.trim();
        self.entries
            .iter()
            .find(|e| e.code.eq_ignore_ascii_case(needle) || e.key.eq_ignore_ascii_case(needle))
            .map(|e| e.key.as_str())
    }

    pub fn resolve_with(&self, code_or_key: &str, policy: UnknownCodePolicy) -> Option<String> {
        match (self.resolve(code_or_key), policy) {
            (Some(key), _) => Some(key.into()),
            (None, UnknownCodePolicy::PassThrough) => Some(code_or_key.trim().into()),
            (None, UnknownCodePolicy::Reject) => None,
        }
    }

    /// The World Bank code for a key, if the key is mapped.
    pub fn code_for(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.key.eq_ignore_ascii_case(key))
            .map(|e| e.code.as_str())
    }
}
