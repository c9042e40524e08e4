//! Rolling-window correlation screening against white-noise bands.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::exec::Executor;
use crate::frame::AlignedSeriesSet;
use crate::rng::{self, domain, Gaussian};
use crate::stats;

pub const MIN_BAND_REPLICATIONS: usize = 100;

/// Correlation of each contiguous window; `None` where either input is
/// constant over the window.
pub fn rolling_correlation(x: &[f64], y: &[f64], width: usize) -> Result<Vec<Option<f64>>> {
    if x.len() != y.len() {
        return Err(CoreError::InvalidInput(alloc::format!(
            "series lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if width < 2 {
        return Err(CoreError::param("width", "must be at least 2"));
    }
    if x.len() < width {
        return Err(CoreError::InsufficientSample {
            needed: width - 1,
            available: x.len(),
        });
    }
    Ok((0..=x.len() - width)
        .map(|s| window_correlation(&x[s..s + width], &y[s..s + width]))
        .collect())
}

fn window_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() == 2 {
        let dx = x[1] - x[0];
        let dy = y[1] - y[0];
        if dx == 0.0 || dy == 0.0 {
            return None;
        }
        return Some(if (dx > 0.0) == (dy > 0.0) { 1.0 } else { -1.0 });
    }
    let mx = stats::mean(x);
    let my = stats::mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Sample SD (divisor `m - 1`) of the defined correlations.
pub fn sd_rolcor(sequence: &[Option<f64>]) -> Result<f64> {
    let usable: Vec<f64> = sequence.iter().flatten().copied().collect();
    if usable.len() < 2 {
        return Err(CoreError::InsufficientSample {
            needed: 1,
            available: usable.len(),
        });
    }
    Ok(stats::sample_sd(&usable))
}

/// How null series are drawn for the bands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullModel {
    /// Two independent standard Gaussian series.
    #[default]
    Gaussian,
    /// Independent random permutations of the observed series.
    Permutation { x: Vec<f64>, y: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub band_95: f64,
    pub band_05: f64,
    /// Replications whose SD was undefined (all windows degenerate).
    pub skipped: usize,
}

fn shuffled<R: rand_core::RngCore>(values: &[f64], rng: &mut R) -> Vec<f64> {
    let mut v = values.to_vec();
    for i in (1..v.len()).rev() {
        let j = rng::index_below(rng, i + 1);
        v.swap(i, j);
    }
    v
}

/// 95th and 5th percentiles (type 7) of the null SD of rolling correlation.
pub fn whitenoise_band<E: Executor>(
    n: usize,
    width: usize,
    replications: usize,
    seed: u64,
    null: &NullModel,
    exec: &E,
) -> Result<Band> {
    if replications < MIN_BAND_REPLICATIONS {
        return Err(CoreError::param(
            "replications",
            alloc::format!("need at least {MIN_BAND_REPLICATIONS}, got {replications}"),
        ));
    }
    if let NullModel::Permutation { x, y } = null {
        if x.len() != n || y.len() != n {
            return Err(CoreError::InvalidInput("permutation null needs series of length n".into()));
        }
    }
    if n < width || width < 2 {
        return Err(CoreError::InsufficientSample {
            needed: width.max(2) - 1,
            available: n,
        });
    }
    // Width is part of the stream key so bands for different widths are
    // independent.
    let band_seed = seed ^ (width as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let draws = exec.map(replications, |b| {
        let mut r = rng::stream(band_seed, domain::BAND, b as u64);
        let (x, y) = match null {
            NullModel::Gaussian => {
                let mut g = Gaussian::new();
                let x: Vec<f64> = (0..n).map(|_| g.sample(&mut r)).collect();
                let y: Vec<f64> = (0..n).map(|_| g.sample(&mut r)).collect();
                (x, y)
            }
            NullModel::Permutation { x, y } => (shuffled(x, &mut r), shuffled(y, &mut r)),
        };
        rolling_correlation(&x, &y, width)
            .ok()
            .and_then(|seq| sd_rolcor(&seq).ok())
    });
    let values: Vec<f64> = draws.iter().flatten().copied().collect();
    if values.len() < 2 {
        return Err(CoreError::Degenerate("null rolling correlations are undefined".into()));
    }
    let sorted = stats::sorted(&values);
    Ok(Band {
        band_95: stats::quantile_linear(&sorted, 0.95),
        band_05: stats::quantile_linear(&sorted, 0.05),
        skipped: replications - values.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollCorrResult {
    pub dependent: String,
    pub regressor: String,
    pub width: usize,
    pub correlations: Vec<Option<f64>>,
    pub degenerate_windows: usize,
    pub sd_rolcor: f64,
    pub band_95: f64,
    pub band_05: f64,
    pub inside_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenParams {
    #[serde(default = "default_widths")]
    pub widths: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Draw the bands from permutations of each pair instead of Gaussian noise.
    #[serde(default)]
    pub permutation: bool,
}

fn default_widths() -> Vec<usize> {
    alloc::vec![2, 3, 4]
}

fn default_replications() -> usize {
    1000
}

impl Default for ScreenParams {
    fn default() -> Self {
        Self {
            widths: default_widths(),
            replications: default_replications(),
            seed: 0,
            permutation: false,
        }
    }
}

/// One row per (regressor, width), regressors in input order.
pub fn screen_pairs<E: Executor>(
    data: &AlignedSeriesSet,
    params: &ScreenParams,
    exec: &E,
) -> Result<Vec<RollCorrResult>> {
    let y = &data.dependent().values;
    let n = y.len();
    let mut rows = Vec::new();
    // Gaussian bands depend only on (n, width) and are shared across pairs.
    let mut shared: Vec<(usize, Band)> = Vec::new();
    for reg in data.regressors() {
        for &width in &params.widths {
            let band = if params.permutation {
                let null = NullModel::Permutation {
                    x: reg.values.clone(),
                    y: y.clone(),
                };
                whitenoise_band(n, width, params.replications, params.seed, &null, exec)?
            } else if let Some((_, b)) = shared.iter().find(|(w, _)| *w == width) {
                *b
            } else {
                let b = whitenoise_band(n, width, params.replications, params.seed, &NullModel::Gaussian, exec)?;
                shared.push((width, b));
                b
            };
            let correlations = rolling_correlation(&reg.values, y, width)?;
            let sd = sd_rolcor(&correlations)?;
            rows.push(RollCorrResult {
                dependent: data.dependent().name.clone(),
                regressor: reg.name.clone(),
                width,
                degenerate_windows: correlations.iter().filter(|c| c.is_none()).count(),
                correlations,
                sd_rolcor: sd,
                band_95: band.band_95,
                band_05: band.band_05,
                inside_band: band.band_05 <= sd && sd <= band.band_95,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn width_two_signs() {
        let r = rolling_correlation(&[1.0, 2.0, 3.0], &[5.0, 3.0, 8.0], 2).unwrap();
        assert_eq!(r, alloc::vec![Some(-1.0), Some(1.0)]);
    }

    #[test]
    fn identical_inputs_correlate_perfectly() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        for w in 2..=6 {
            let r = rolling_correlation(&x, &x, w).unwrap();
            assert_eq!(r.len(), 6 - w + 1);
            assert!(r.iter().all(|c| *c == Some(1.0)));
        }
    }

    #[test]
    fn constant_window_is_degenerate() {
        let r = rolling_correlation(&[1.0, 1.0, 1.0, 2.0], &[3.0, 1.0, 2.0, 5.0], 3).unwrap();
        assert_eq!(r[0], None);
        assert!(r[1].is_some());
    }

    #[test]
    fn sd_of_two_values() {
        let sd = sd_rolcor(&[Some(-1.0), Some(1.0)]).unwrap();
        assert!((sd - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(sd_rolcor(&[Some(0.3); 5]).unwrap(), 0.0);
        assert!(sd_rolcor(&[Some(0.3), None]).is_err());
    }

    #[test]
    fn band_order_and_reproducibility() {
        let a = whitenoise_band(16, 3, 200, 9, &NullModel::Gaussian, &Sequential).unwrap();
        let b = whitenoise_band(16, 3, 200, 9, &NullModel::Gaussian, &Sequential).unwrap();
        assert_eq!(a, b);
        assert!(a.band_05 <= a.band_95);
        assert!(whitenoise_band(16, 3, 99, 9, &NullModel::Gaussian, &Sequential).is_err());
    }

    #[test]
    fn identical_pair_sits_below_band() {
        let x: alloc::vec::Vec<f64> = crate::dgp::gen_white_noise(16, 3);
        let data = AlignedSeriesSet::from_vectors(("Y", x.clone()), alloc::vec![("X", x.clone()), ("Z", crate::dgp::gen_white_noise(16, 4))]).unwrap();
        let rows = screen_pairs(&data, &ScreenParams { replications: 200, ..ScreenParams::default() }, &Sequential).unwrap();
        assert_eq!(rows.len(), 2 * 3);
        assert_eq!(rows[0].sd_rolcor, 0.0);
        assert!(!rows[0].inside_band && rows[0].sd_rolcor < rows[0].band_05);
    }
}
