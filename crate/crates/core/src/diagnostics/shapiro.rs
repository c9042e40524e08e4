//! Shapiro-Wilk W test (Royston's AS R94 approximation).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::special::{normal_quantile, normal_tails};

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Half of the antisymmetric coefficient vector (lower tail, positive).
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![core::f64::consts::FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let an25 = an + 0.25;
    let m: Vec<f64> = (1..=half)
        .map(|i| normal_quantile((i as f64 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = libm::sqrt(summ2);
    let rsn = 1.0 / libm::sqrt(an);
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;
    let mut a: Vec<f64> = vec![0.0; half];
    let (start, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = libm::sqrt(
            (summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2),
        );
        a[1] = a2;
        (2, fac)
    } else {
        let fac = libm::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        (1, fac)
    };
    a[0] = a1;
    for i in start..half {
        a[i] = -m[i] / fac;
    }
    a
}

/// Returns `(W, p)`.
pub fn shapiro_wilk_w(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if !(3..=5000).contains(&n) {
        return Err(CoreError::param("n", alloc::format!("Shapiro-Wilk needs 3..=5000 values, got {n}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("non-finite value in Shapiro-Wilk input".into()));
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 0.0) {
        return Err(CoreError::Degenerate("Shapiro-Wilk input has zero variance".into()));
    }
    let a = coefficients(n);
    // Full antisymmetric weight for each order statistic.
    let weight = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            core::cmp::Ordering::Less => -a[i],
            core::cmp::Ordering::Greater => a[j],
            core::cmp::Ordering::Equal => 0.0,
        }
    };
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let sx = xs.iter().sum::<f64>() / n as f64;
    let sa = (0..n).map(weight).sum::<f64>() / n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let asa = weight(i) - sa;
        let xsx = xi - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = libm::sqrt(ssa * ssx);
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    if n == 3 {
        const SIX_OVER_PI: f64 = 1.909_859_317_102_744;
        let p = SIX_OVER_PI * (libm::asin(libm::sqrt(w)) - core::f64::consts::FRAC_PI_3);
        return Ok((w, p.clamp(0.0, 1.0)));
    }
    let an = n as f64;
    let mut y = libm::log(w1);
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return Ok((w, 0.0));
        }
        y = -libm::log(gamma - y);
        (poly(&C3, an), libm::exp(poly(&C4, an)))
    } else {
        let ln_n = libm::log(an);
        (poly(&C5, ln_n), libm::exp(poly(&C6, ln_n)))
    };
    Ok((w, normal_tails((y - m) / s).1))
}
