//! Lag and difference operators on evenly spaced series.

use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Shifts `series` forward by `k`: element `t` of the output is element
/// `t - k` of the input, and the first `k` slots are unavailable.
pub fn lag(series: &[f64], k: usize) -> Result<Vec<Option<f64>>> {
    let masked: Vec<Option<f64>> = series.iter().copied().map(Some).collect();
    lag_masked(&masked, k)
}

/// [`lag`] for series that already carry unavailable slots.
pub fn lag_masked(series: &[Option<f64>], k: usize) -> Result<Vec<Option<f64>>> {
    if k > 0 && k >= series.len() {
        return Err(CoreError::param(
            "k",
            alloc::format!("lag {k} is not shorter than the series ({})", series.len()),
        ));
    }
    let mut out = Vec::with_capacity(series.len());
    out.extend(core::iter::repeat(None).take(k));
    out.extend_from_slice(&series[..series.len() - k]);
    Ok(out)
}

/// `k`-th order difference `s_t - s_{t-k}`, dropping the first `k` slots.
pub fn diff(series: &[f64], k: usize) -> Result<Vec<f64>> {
    check_diff(series.len(), k)?;
    Ok(series[k..]
        .iter()
        .zip(series)
        .map(|(now, before)| now - before)
        .collect())
}

/// [`diff`] that keeps the input length, marking the first `k` slots
/// unavailable.
pub fn diff_padded(series: &[f64], k: usize) -> Result<Vec<Option<f64>>> {
    let body = diff(series, k)?;
    let mut out = Vec::with_capacity(series.len());
    out.extend(core::iter::repeat(None).take(k));
    out.extend(body.into_iter().map(Some));
    Ok(out)
}

fn check_diff(len: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(CoreError::param("k", "difference order must be positive"));
    }
    if len <= k {
        return Err(CoreError::param(
            "k",
            alloc::format!("series of length {len} is too short for difference order {k}"),
        ));
    }
    Ok(())
}
