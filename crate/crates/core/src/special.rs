//! Special functions backing the distribution CDFs: log-gamma, regularized
//! incomplete gamma and beta (series plus modified-Lentz continued
//! fractions), and the normal quantile.

use crate::error::{CoreError, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete gamma, returned as the pair `(P(a, x), Q(a, x))`.
///
/// The tail that is evaluated directly is the one with the better-conditioned
/// expansion; the other is its complement, so `P + Q == 1` to rounding.
pub fn gamma_inc(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(CoreError::param("a", "shape must be positive and finite"));
    }
    if x.is_nan() {
        return Err(CoreError::InvalidInput("incomplete gamma at NaN".into()));
    }
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if x < a + 1.0 {
        let p = gamma_p_series(a, x)?;
        Ok((p, 1.0 - p))
    } else {
        let q = gamma_q_fraction(a, x)?;
        Ok((1.0 - q, q))
    }
}

fn gamma_p_series(a: f64, x: f64) -> Result<f64> {
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            let log_prefix = a * libm::log(x) - x - ln_gamma(a);
            return Ok((sum * libm::exp(log_prefix)).min(1.0));
        }
    }
    Err(CoreError::Undefined("incomplete gamma series did not converge".into()))
}

fn gamma_q_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let i = i as f64;
        let an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            let log_prefix = a * libm::log(x) - x - ln_gamma(a);
            return Ok((libm::exp(log_prefix) * h).min(1.0));
        }
    }
    Err(CoreError::Undefined("incomplete gamma fraction did not converge".into()))
}

/// Regularized incomplete beta as the pair `(I_x(a, b), 1 - I_x(a, b))`.
///
/// `y` must equal `1 - x`; callers pass it separately so it can be formed
/// without cancellation (e.g. `t^2 / (df + t^2)`).
pub fn beta_inc(a: f64, b: f64, x: f64, y: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(CoreError::param("a, b", "shapes must be positive and finite"));
    }
    if x.is_nan() || y.is_nan() {
        return Err(CoreError::InvalidInput("incomplete beta at NaN".into()));
    }
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if y <= 0.0 {
        return Ok((1.0, 0.0));
    }
    let log_front = a * libm::log(x) + b * libm::log(y) - ln_beta(a, b);
    let front = libm::exp(log_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (front * beta_fraction(a, b, x, y)? / a).min(1.0);
        Ok((lower, 1.0 - lower))
    } else {
        let upper = (front * beta_fraction(b, a, y, x)? / b).min(1.0);
        Ok((1.0 - upper, upper))
    }
}

// Continued fraction for I_x(a, b) (modified Lentz).
fn beta_fraction(a: f64, b: f64, x: f64, _y: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(CoreError::Undefined("incomplete beta fraction did not converge".into()))
}

/// Standard normal lower and upper tails `(Phi(x), 1 - Phi(x))`.
pub fn normal_tails(x: f64) -> (f64, f64) {
    let scaled = x * core::f64::consts::FRAC_1_SQRT_2;
    if x < 0.0 {
        let lower = 0.5 * libm::erfc(-scaled);
        (lower, 1.0 - lower)
    } else {
        let upper = 0.5 * libm::erfc(scaled);
        (1.0 - upper, upper)
    }
}

/// Standard normal quantile (Wichura's AS 241, PPND16).
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_7)
                * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_71)
                * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = libm::sqrt(-libm::log(r));
    let value = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_6)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}
