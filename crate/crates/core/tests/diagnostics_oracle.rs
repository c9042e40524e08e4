//! Diagnostics against values frozen from scipy / statsmodels
//! (see tests/oracles/diagnostics.py).

use ardl_core::diagnostics::*;
use ardl_core::ols::{ols_fit, DesignMatrix, OlsFit};
use serde_json::Value;

const ORACLE: &str = include_str!("data/diagnostics_oracle.json");

fn vec_of(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn pair(v: &Value) -> (f64, f64) {
    let p = vec_of(v);
    (p[0], p[1])
}

fn close(what: &str, got: f64, want: f64, tol: f64) {
    let err = (got - want).abs() / want.abs().max(1.0);
    assert!(err <= tol, "{what}: got {got}, want {want}");
}

fn fitted(case: &Value) -> (DesignMatrix, Vec<f64>, OlsFit) {
    let x = vec_of(&case["x"]);
    let z = vec_of(&case["z"]);
    let y = vec_of(&case["y"]);
    let n = y.len();
    let d = DesignMatrix::with_intercept(vec![("x".into(), x), ("z".into(), z)], n).unwrap();
    let fit = ols_fit(&d, &y).unwrap();
    (d, y, fit)
}

#[test]
fn shapiro_wilk_matches_reference() {
    let oracle: Value = serde_json::from_str(ORACLE).unwrap();
    for case in oracle["shapiro"].as_array().unwrap() {
        let x = vec_of(&case["x"]);
        let (w, p) = shapiro_wilk_w(&x).unwrap();
        let n = x.len();
        assert!((w - case["w"].as_f64().unwrap()).abs() < 1e-3, "W n={n}");
        assert!((p - case["p"].as_f64().unwrap()).abs() < 1e-3, "p n={n}");
        assert!(w > 0.0 && w <= 1.0);
    }
}

#[test]
fn regression_tests_match_reference() {
    let oracle: Value = serde_json::from_str(ORACLE).unwrap();
    for case in oracle["regressions"].as_array().unwrap() {
        let (d, y, fit) = fitted(case);
        let n = y.len();
        let bg = breusch_godfrey(&d, &fit, 1).unwrap();
        let (s, p) = pair(&case["bg1"]);
        close("bg1", bg.statistic, s, 1e-10);
        close("bg1 p", bg.p_value, p, 1e-10);
        if n == 8 {
            continue;
        }
        let checks = [
            ("bg3", breusch_godfrey(&d, &fit, 3).unwrap()),
            ("lb5", ljung_box(&fit.residuals, 5).unwrap()),
            ("bp_koenker", breusch_pagan(&d, &fit, BreuschPaganForm::Koenker).unwrap()),
            ("bp_classic", breusch_pagan(&d, &fit, BreuschPaganForm::Classic).unwrap()),
            ("reset", ramsey_reset(&d, &y, &fit, &[2, 3]).unwrap()),
            ("rainbow", rainbow(&d, &y, None, 0.5).unwrap()),
        ];
        for (key, r) in checks {
            let (s, p) = pair(&case[key]);
            close(key, r.statistic, s, 1e-8);
            close(key, r.p_value, p, 1e-8);
        }
        let inf = influence_measures(&fit, None, None);
        for (got, want) in inf.cooks_distance.iter().zip(vec_of(&case["cooks"])) {
            close("cooks", *got, want, 1e-9);
        }
    }
}

#[test]
fn cooks_distance_matches_leave_one_out_refits() {
    // One gross outlier among 20 points on a line with small noise.
    let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
    let noise = ardl_core::dgp::gen_white_noise(20, 77);
    let mut y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| 2.0 + 1.5 * a + 0.2 * e).collect();
    y[13] += 6.0;
    let d = DesignMatrix::with_intercept(vec![("x".into(), x)], 20).unwrap();
    let fit = ols_fit(&d, &y).unwrap();
    let inf = influence_measures(&fit, None, None);
    let k = fit.ncoef() as f64;
    for i in 0..20 {
        let keep: Vec<usize> = (0..20).filter(|&j| j != i).collect();
        let loo = ols_fit(&d.select_rows(&keep), &keep.iter().map(|&j| y[j]).collect::<Vec<_>>()).unwrap();
        let shift: f64 = (0..20)
            .map(|r| {
                let pred: f64 = (0..d.ncols()).map(|c| d.value(r, c) * loo.coef[c]).sum();
                (fit.fitted[r] - pred).powi(2)
            })
            .sum();
        let direct = shift / (k * fit.sigma2);
        assert!((direct - inf.cooks_distance[i]).abs() < 1e-9 * direct.max(1.0));
    }
    let worst = (0..20)
        .max_by(|&a, &b| inf.cooks_distance[a].total_cmp(&inf.cooks_distance[b]))
        .unwrap();
    assert_eq!(worst, 13);
    assert!(inf.flagged.contains(&13));
}

#[test]
fn zero_residual_at_mean_has_zero_distance() {
    let x = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
    let y = vec![1.0, -1.0, 0.0, 1.0, -1.0];
    let d = DesignMatrix::with_intercept(vec![("x".into(), x)], 5).unwrap();
    let fit = ols_fit(&d, &y).unwrap();
    let inf = influence_measures(&fit, None, None);
    assert!(inf.cooks_distance[2].abs() < 1e-15);
}
