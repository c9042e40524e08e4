//! Ordinary least squares with the usual fit statistics, and the Wald F test
//! between nested fits.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{CoreError, Result};
use crate::linalg::{DependentColumn, Qr};
use crate::stats;

/// Columns below `RANK_TOL * (largest column norm)` after orthogonalization
/// are treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Relative size (against `n * var(y)`) below which a residual sum of squares
/// counts as an exact fit for the F-test degenerate rule.
pub const PERFECT_FIT_TOL: f64 = 1e-12;

/// A named regressor matrix stored by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    intercept: bool,
}

impl DesignMatrix {
    /// Builds a design; when `intercept` is set, column 0 must be all ones.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, intercept: bool) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(CoreError::InvalidInput(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(CoreError::InvalidInput("design has no columns".into()));
        }
        let n = columns[0].len();
        let mut seen = BTreeSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if !seen.insert(name.as_str()) {
                return Err(CoreError::InvalidInput(format!("duplicate column name `{name}`")));
            }
            if col.len() != n {
                return Err(CoreError::InvalidInput(format!(
                    "column `{name}` has {} rows, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::InvalidInput(format!("column `{name}` has non-finite values")));
            }
        }
        if intercept && columns[0].iter().any(|&v| v != 1.0) {
            return Err(CoreError::InvalidInput("intercept column must be all ones".into()));
        }
        Ok(Self {
            names,
            columns,
            intercept,
        })
    }

    /// Intercept column followed by the given regressors.
    pub fn with_intercept(regressors: Vec<(String, Vec<f64>)>, n: usize) -> Result<Self> {
        let mut names = Vec::with_capacity(regressors.len() + 1);
        let mut columns = Vec::with_capacity(regressors.len() + 1);
        names.push(String::from("(Intercept)"));
        columns.push(alloc::vec![1.0; n]);
        for (name, col) in regressors {
            names.push(name);
            columns.push(col);
        }
        Self::new(names, columns, true)
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    /// Appends a column.
    pub fn with_column(&self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let mut names = self.names.clone();
        let mut columns = self.columns.clone();
        names.push(name.into());
        columns.push(values);
        Self::new(names, columns, self.intercept)
    }

    /// Keeps only the columns whose indices satisfy `keep`.
    pub fn select_columns(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for j in 0..self.ncols() {
            if keep(j) {
                names.push(self.names[j].clone());
                columns.push(self.columns[j].clone());
            }
        }
        let intercept = self.intercept && keep(0);
        Self::new(names, columns, intercept)
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self {
            names: self.names.clone(),
            columns,
            intercept: self.intercept,
        }
    }
}

/// A least-squares fit with its inference and information criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    pub t_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// Residual variance `rss / df_resid`.
    pub sigma2: f64,
    pub rss: f64,
    /// Centered total sum of squares of the response.
    pub tss: f64,
    pub r2: f64,
    pub adj_r2: f64,
    /// Overall F test that every non-intercept coefficient is zero; absent
    /// for intercept-only fits.
    pub f_stat: Option<f64>,
    pub f_pvalue: Option<f64>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub leverage: Vec<f64>,
    pub nobs: usize,
    pub df_resid: usize,
    pub has_intercept: bool,
    /// Unscaled coefficient covariance `(X'X)^{-1}`, row-major.
    pub xtx_inv: Vec<f64>,
}

impl OlsFit {
    pub fn ncoef(&self) -> usize {
        self.coef.len()
    }

    pub fn coef_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Threshold under which an RSS counts as zero (exact fit).
    pub fn perfect_fit_threshold(&self) -> f64 {
        PERFECT_FIT_TOL * self.tss
    }
}

/// Gaussian log-likelihood at the ML variance `rss / n`.
pub fn gaussian_loglik(rss: f64, n: usize) -> f64 {
    let n = n as f64;
    -0.5 * n * (libm::log(2.0 * core::f64::consts::PI) + libm::log(rss / n) + 1.0)
}

/// Fits `y` on `x` by Householder QR.
pub fn ols_fit(x: &DesignMatrix, y: &[f64]) -> Result<OlsFit> {
    let n = x.nrows();
    let k = x.ncols();
    if y.len() != n {
        return Err(CoreError::InvalidInput(format!(
            "response has {} rows, design has {n}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("response has non-finite values".into()));
    }
    if n <= k {
        return Err(CoreError::InsufficientSample {
            needed: k,
            available: n,
        });
    }
    let qr = Qr::factorize(x.columns(), RANK_TOL).map_err(|DependentColumn(j)| {
        CoreError::RankDeficient {
            column: x.names()[j].clone(),
        }
    })?;

    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);
    let coef = qr.solve_r(&qty);

    // Residuals are Q applied to the trailing part of Q'y.
    let mut residuals = qty.clone();
    residuals[..k].iter_mut().for_each(|v| *v = 0.0);
    qr.apply_q(&mut residuals);
    let fitted: Vec<f64> = y.iter().zip(&residuals).map(|(yi, ei)| yi - ei).collect();

    let rss: f64 = qty[k..].iter().map(|v| v * v).sum();
    let df_resid = n - k;
    let sigma2 = rss / df_resid as f64;
    let xtx_inv = qr.xtx_inverse();

    let mut stderr = Vec::with_capacity(k);
    let mut t_values = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    let t_dist = DistSpec::StudentT { df: df_resid as f64 };
    for j in 0..k {
        let se = libm::sqrt(sigma2 * xtx_inv[j * k + j]);
        let (t, p) = if se > 0.0 {
            let t = coef[j] / se;
            (t, 2.0 * t_dist.sf(t.abs())?)
        } else if coef[j] == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(coef[j]), 0.0)
        };
        stderr.push(se);
        t_values.push(t);
        p_values.push(p.min(1.0));
    }

    let tss = stats::centered_sum_squares(y);
    let intercept = x.has_intercept();
    // Total sum of squares under the "all slopes zero" model.
    let null_ss = if intercept { tss } else { y.iter().map(|v| v * v).sum() };
    let df_model = if intercept { k - 1 } else { k };
    let df_null = if intercept { n - 1 } else { n };
    let r2 = if null_ss > 0.0 {
        // intercept-only: rss equals tss up to rounding
        if df_model == 0 && intercept { 0.0 } else { 1.0 - rss / null_ss }
    } else {
        f64::NAN
    };
    let adj_r2 = 1.0 - (1.0 - r2) * df_null as f64 / df_resid as f64;

    let (f_stat, f_pvalue) = if df_model == 0 {
        (None, None)
    } else {
        let scale = if tss > 0.0 { tss } else { null_ss };
        let (f, p) = f_from_rss(null_ss, rss, df_model, df_resid, PERFECT_FIT_TOL * scale)?;
        (Some(f), Some(p))
    };

    let loglik = gaussian_loglik(rss, n);
    let params = (k + 1) as f64;
    let aic = 2.0 * params - 2.0 * loglik;
    let bic = params * libm::log(n as f64) - 2.0 * loglik;

    Ok(OlsFit {
        names: x.names().to_vec(),
        coef,
        stderr,
        t_values,
        p_values,
        residuals,
        fitted,
        sigma2,
        rss,
        tss,
        r2,
        adj_r2,
        f_stat,
        f_pvalue,
        loglik,
        aic,
        bic,
        leverage: qr.leverage(),
        nobs: n,
        df_resid,
        has_intercept: intercept,
        xtx_inv,
    })
}

/// F statistic and p-value for nested models from their residual sums of
/// squares, applying the degenerate exact-fit rule.
pub fn f_from_rss(
    rss_restricted: f64,
    rss_unrestricted: f64,
    m: usize,
    df_u: usize,
    zero_tol: f64,
) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(CoreError::param("m", "at least one restriction is required"));
    }
    if df_u == 0 {
        return Err(CoreError::param("df_resid", "unrestricted model has no residual degrees of freedom"));
    }
    let u_zero = rss_unrestricted <= zero_tol;
    let r_zero = rss_restricted <= zero_tol;
    if u_zero && r_zero {
        return Ok((0.0, 1.0));
    }
    if u_zero {
        return Ok((f64::INFINITY, 0.0));
    }
    let gain = (rss_restricted - rss_unrestricted).max(0.0);
    let f = (gain / m as f64) / (rss_unrestricted / df_u as f64);
    let p = DistSpec::F {
        df1: m as f64,
        df2: df_u as f64,
    }
    .sf(f)?;
    Ok((f, p))
}

/// Result of a nested-model F test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldF {
    pub f_stat: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
}

/// F test of `m` linear restrictions, comparing a restricted fit against the
/// unrestricted fit on the same response and sample.
pub fn wald_f(unrestricted: &OlsFit, restricted: &OlsFit, m: usize) -> Result<WaldF> {
    if unrestricted.nobs != restricted.nobs {
        return Err(CoreError::InvalidInput(format!(
            "fits use different samples ({} vs {} rows)",
            unrestricted.nobs, restricted.nobs
        )));
    }
    let (f_stat, p_value) = f_from_rss(
        restricted.rss,
        unrestricted.rss,
        m,
        unrestricted.df_resid,
        unrestricted.perfect_fit_threshold(),
    )?;
    Ok(WaldF {
        f_stat,
        p_value,
        df1: m,
        df2: unrestricted.df_resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn simple(x: &[f64]) -> DesignMatrix {
        DesignMatrix::with_intercept(vec![("x".into(), x.to_vec())], x.len()).unwrap()
    }

    #[test]
    fn intercept_only_has_zero_r2() {
        let x = DesignMatrix::new(vec!["(Intercept)".into()], vec![vec![1.0; 7]], true).unwrap();
        let fit = ols_fit(&x, &[0.3, 1.7, -2.2, 0.9, 4.1, -0.6, 1.3]).unwrap();
        assert_eq!(fit.r2, 0.0);
        assert_eq!(fit.adj_r2, 0.0);
        assert!(fit.f_stat.is_none());
    }

    #[test]
    fn exact_line() {
        let fit = ols_fit(&simple(&[0.0, 1.0, 2.0]), &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.coef[0] - 1.0).abs() < 1e-12);
        assert!((fit.coef[1] - 2.0).abs() < 1e-12);
        assert!(fit.residuals.iter().all(|e| e.abs() < 1e-12));
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_point_fixture() {
        // Normal equations: X'X = [[4, 10], [10, 30]], X'y = [9, 27]
        // -> slope 0.9, intercept 0.0
        let fit = ols_fit(&simple(&[1.0, 2.0, 3.0, 4.0]), &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(fit.coef[0].abs() < 1e-12);
        assert!((fit.coef[1] - 0.9).abs() < 1e-12);
        let expect = [0.1, 0.2, -0.7, 0.4];
        for (e, x) in fit.residuals.iter().zip(expect) {
            assert!((e - x).abs() < 1e-12);
        }
        let lev: f64 = fit.leverage.iter().sum();
        assert!((lev - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_names_column() {
        let x = DesignMatrix::with_intercept(
            vec![("a".into(), vec![1.0, 2.0, 3.0, 4.0]), ("b".into(), vec![2.0, 4.0, 6.0, 8.0])],
            4,
        )
        .unwrap();
        let err = ols_fit(&x, &[1.0, 0.0, 2.0, 1.0]).unwrap_err();
        assert_eq!(err, CoreError::RankDeficient { column: "b".into() });
    }

    #[test]
    fn too_few_rows() {
        let x = simple(&[1.0, 2.0]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0]),
            Err(CoreError::InsufficientSample { .. })
        ));
    }

    #[test]
    fn wald_formula() {
        let (f, _) = f_from_rss(20.0, 10.0, 2, 10, 0.0).unwrap();
        assert!((f - 5.0).abs() < 1e-12);
        let (f, p) = f_from_rss(10.0, 10.0, 2, 10, 0.0).unwrap();
        assert_eq!((f, p), (0.0, 1.0));
        assert_eq!(f_from_rss(1e-20, 1e-21, 1, 5, 1e-12).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn wald_on_identical_fits() {
        let x = simple(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let fit = ols_fit(&x, &[1.0, 2.5, 2.0, 4.5, 4.0]).unwrap();
        let w = wald_f(&fit, &fit, 1).unwrap();
        assert_eq!(w.f_stat, 0.0);
        assert_eq!(w.p_value, 1.0);
    }

    #[test]
    fn design_validation() {
        assert!(DesignMatrix::new(vec!["a".into(), "a".into()], vec![vec![1.0], vec![2.0]], false).is_err());
        assert!(DesignMatrix::new(vec!["a".into()], vec![vec![f64::NAN]], false).is_err());
        assert!(DesignMatrix::new(vec!["a".into()], vec![vec![2.0]], true).is_err());
    }
}
