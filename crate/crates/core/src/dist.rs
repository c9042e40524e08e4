//! Reference distributions for test statistics.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::special::{beta_inc, gamma_inc, normal_tails};

/// A sampling distribution with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistSpec {
    Normal,
    StudentT { df: f64 },
    ChiSquare { df: f64 },
    F { df1: f64, df2: f64 },
}

fn check_df(name: &'static str, df: f64) -> Result<()> {
    if df > 0.0 && df.is_finite() {
        Ok(())
    } else {
        Err(CoreError::param(name, "degrees of freedom must be positive and finite"))
    }
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistSpec::Normal => Ok(()),
            DistSpec::StudentT { df } | DistSpec::ChiSquare { df } => check_df("df", df),
            DistSpec::F { df1, df2 } => {
                check_df("df1", df1)?;
                check_df("df2", df2)
            }
        }
    }

    /// `(P[X <= x], P[X > x])`; the two always sum to one.
    pub fn tails(&self, x: f64) -> Result<(f64, f64)> {
        self.validate()?;
        if x.is_nan() {
            return Err(CoreError::InvalidInput("distribution evaluated at NaN".into()));
        }
        match *self {
            DistSpec::Normal => Ok(normal_tails(x)),
            DistSpec::StudentT { df } => {
                if x.is_infinite() {
                    return Ok(if x > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) });
                }
                let t2 = x * x;
                // I_{df/(df+t^2)}(df/2, 1/2) = P[|T| > |t|]
                let (outside, _) = beta_inc(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2))?;
                let beyond = 0.5 * outside;
                if x >= 0.0 {
                    Ok((1.0 - beyond, beyond))
                } else {
                    Ok((beyond, 1.0 - beyond))
                }
            }
            DistSpec::ChiSquare { df } => gamma_inc(0.5 * df, 0.5 * x),
            DistSpec::F { df1, df2 } => {
                if x <= 0.0 {
                    return Ok((0.0, 1.0));
                }
                if x.is_infinite() {
                    return Ok((1.0, 0.0));
                }
                let scaled = df1 * x;
                beta_inc(0.5 * df1, 0.5 * df2, scaled / (scaled + df2), df2 / (scaled + df2))
            }
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.tails(x).map(|(lower, _)| lower)
    }

    /// Upper tail `P[X > x]`, the p-value of a right-tailed test.
    pub fn sf(&self, x: f64) -> Result<f64> {
        self.tails(x).map(|(_, upper)| upper)
    }
}

/// Evaluates the CDF of `spec` at `x`.
pub fn cdf_eval(spec: &DistSpec, x: f64) -> Result<f64> {
    spec.cdf(x)
}
