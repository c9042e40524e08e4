//! Synthetic data generators: white noise, random walks, AR(1), cointegrated
//! pairs, and a synthetic G20-style indicator panel.
//!
//! All draws come from [`crate::rng`] streams, so a `(spec, seed)` pair
//! reproduces the same numbers on any platform.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::frame::{NamedSeries, Observation, PanelTable};
use crate::rng::{self, domain, Gaussian};

/// Which process to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    WhiteNoise,
    RandomWalk,
    Ar1 { rho: f64 },
    CointegratedPair { slope: f64, noise: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    #[serde(flatten)]
    pub kind: DgpKind,
    pub n: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(CoreError::param("n", "series length must be at least 10"));
        }
        match self.kind {
            DgpKind::Ar1 { rho } if !(rho.abs() < 1.0) => {
                Err(CoreError::param("rho", "AR(1) coefficient must satisfy |rho| < 1"))
            }
            DgpKind::CointegratedPair { noise, .. } if !(noise > 0.0) => {
                Err(CoreError::param("noise", "noise scale must be positive"))
            }
            DgpKind::CointegratedPair { .. } if self.n < 20 => {
                Err(CoreError::param("n", "cointegrated pairs need at least 20 points"))
            }
            _ => Ok(()),
        }
    }
}

fn normals(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, domain::WHITE_NOISE, index);
    let mut g = Gaussian::new();
    (0..n).map(|_| g.sample(&mut rng)).collect()
}

/// `n` iid standard normal draws.
pub fn gen_white_noise(n: usize, seed: u64) -> Vec<f64> {
    normals(n, seed, 0)
}

/// Cumulative sum of [`gen_white_noise`] with the same seed, so the first
/// element is the first draw.
pub fn gen_random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut acc = 0.0;
    gen_white_noise(n, seed)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

/// Stationary AR(1): `y_t = rho y_{t-1} + e_t`, started from the stationary
/// distribution.
pub fn gen_ar1(n: usize, rho: f64, seed: u64) -> Vec<f64> {
    let noise = gen_white_noise(n, seed);
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (t, e) in noise.into_iter().enumerate() {
        let y = if t == 0 {
            e / libm::sqrt(1.0 - rho * rho)
        } else {
            rho * prev + e
        };
        out.push(y);
        prev = y;
    }
    out
}

/// `x` is a random walk and `y_t = slope * x_t + noise * e_t` with iid `e`.
pub fn gen_cointegrated_pair(n: usize, slope: f64, noise: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x = gen_random_walk(n, seed);
    let eps = normals(n, seed, 1);
    let y = x.iter().zip(&eps).map(|(xi, e)| slope * xi + noise * e).collect();
    (x, y)
}

/// Generates the series described by `spec`: `[Y]` for univariate kinds,
/// `[Y, X]` for pairs.
pub fn generate(spec: &DgpSpec) -> Result<Vec<NamedSeries>> {
    spec.validate()?;
    let (n, seed) = (spec.n, spec.seed);
    Ok(match spec.kind {
        DgpKind::WhiteNoise => alloc::vec![NamedSeries::new("Y", gen_white_noise(n, seed))],
        DgpKind::RandomWalk => alloc::vec![NamedSeries::new("Y", gen_random_walk(n, seed))],
        DgpKind::Ar1 { rho } => alloc::vec![NamedSeries::new("Y", gen_ar1(n, rho, seed))],
        DgpKind::CointegratedPair { slope, noise } => {
            let (x, y) = gen_cointegrated_pair(n, slope, noise, seed);
            alloc::vec![NamedSeries::new("Y", y), NamedSeries::new("X", x)]
        }
    })
}

pub const G20_CODES: [&str; 20] = [
    "ARG", "AUS", "BRA", "CAN", "CHN", "DEU", "EUU", "FRA", "GBR", "IDN", "IND", "ITA", "JPN",
    "KOR", "MEX", "RUS", "SAU", "TUR", "USA", "ZAF",
];

/// Shape of the synthetic indicator panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticPanelSpec {
    pub entities: usize,
    pub first_year: i32,
    pub years: usize,
    /// Share of cells masked as missing, in `[0, 0.5]`.
    pub missing_fraction: f64,
    pub seed: u64,
}

impl SyntheticPanelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.entities == 0 || self.entities > G20_CODES.len() {
            return Err(CoreError::param("entities", "must be between 1 and 20"));
        }
        if self.years < 10 {
            return Err(CoreError::param("years", "need at least 10 years"));
        }
        if !(0.0..=0.5).contains(&self.missing_fraction) {
            return Err(CoreError::param("missing_fraction", "must lie in [0, 0.5]"));
        }
        Ok(())
    }
}

impl Default for SyntheticPanelSpec {
    fn default() -> Self {
        Self {
            entities: 20,
            first_year: 2007,
            years: 17,
            missing_fraction: 0.0,
            seed: 20_240_101,
        }
    }
}

/// A synthetic panel with all thirteen mapped indicators, built around a
/// latent logistics-quality random walk per country. Trade openness is
/// cointegrated with the overall LPI score and GDP per capita with the
/// latent factor, so the tutorial pipeline has real structure to find.
pub fn synthetic_panel(spec: &SyntheticPanelSpec) -> Result<PanelTable> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (e, code) in G20_CODES.iter().take(spec.entities).enumerate() {
        let mut rng = rng::stream(spec.seed, domain::PANEL, e as u64);
        let mut g = Gaussian::new();
        let mut z = || g.sample(&mut rng);

        let size = 1.0 + 2.0 * (e as f64 / spec.entities as f64);
        let mut latent = 2.7 + 0.08 * z() + 0.05 * e as f64;
        let mut trade_gap = 0.0;
        let mut ecg_gap = 0.0;
        let trade_level = 20.0 + 2.0 * z().abs();
        let loadings = [1.0, 0.9, 1.05, 1.0, 0.95, 1.1];
        let offsets = [0.0, -0.3, 0.0, 0.1, 0.3, 0.0];

        for t in 0..spec.years {
            latent += 0.03 + 0.06 * z();
            trade_gap = 0.5 * trade_gap + 1.5 * z();
            ecg_gap = 0.4 * ecg_gap + 0.05 * z();
            let year = spec.first_year + t as i32;
            let mut push = |key: &str, value: f64| {
                rows.push(Observation {
                    country: String::from(*code),
                    indicator: String::from(key),
                    year,
                    value: Some(value),
                })
            };
            let mut lpi = [0.0; 6];
            for k in 0..6 {
                lpi[k] = (offsets[k] + loadings[k] * latent + 0.04 * z()).clamp(1.0, 5.0);
            }
            for (k, v) in lpi.iter().enumerate() {
                push(LPI_KEYS[k], *v);
            }
            let trd = trade_level + 9.0 * lpi[0] + trade_gap;
            push("TRD", trd);
            push("TRF", (9.0 - 1.6 * lpi[0] + 0.4 * z()).max(0.2));
            push("TRP", (14.0 + 3.0 * latent + 1.2 * z()).max(1.0));
            push("CPT", libm::exp(13.0 + size + 0.8 * latent + 0.05 * z()));
            push("ATF", libm::exp(5.0 + size + 0.6 * latent + 0.08 * z()));
            let ecg = libm::exp(6.5 + 1.1 * latent + 0.01 * t as f64 + ecg_gap);
            push("ECG", ecg);
            push("ENS", libm::exp(10.0 + size + 0.3 * libm::log(ecg) + 0.05 * z()));
        }
    }

    if spec.missing_fraction > 0.0 {
        let mut rng = rng::stream(spec.seed, domain::PANEL, u64::MAX);
        // Keep each (entity, indicator) series at least 3 cells deep so
        // per-country imputation stays feasible.
        let per_series = spec.years;
        for chunk in rows.chunks_mut(per_series * 13) {
            for (i, row) in chunk.iter_mut().enumerate() {
                let t = i / 13;
                if t >= 1 && t + 1 < per_series && rng::uniform(&mut rng) < spec.missing_fraction {
                    row.value = None;
                }
            }
        }
    }
    PanelTable::from_observations(rows, None)
}

const LPI_KEYS: [&str; 6] = ["LPI1", "LPI2", "LPI3", "LPI4", "LPI5", "LPI6"];
