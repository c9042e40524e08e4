//! Table-shaped CSVs and a consolidated JSON built from a run directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{LabError, Result};
use crate::pipeline::{commit_artifacts, Artifact, MANIFEST, SCHEMA_VERSION, STAGES};

pub const TABLE2_HEADER: [&str; 3] = ["rq", "p_value", "homoscedasticity"];
pub const ROLLCORR_HEADER: [&str; 5] = ["variables", "width", "sdrolcor", "q95", "q05"];
pub const TABLE7_HEADER: [&str; 8] = [
    "rq",
    "test",
    "full_f",
    "full_p",
    "full_adj_r2",
    "reduced_f",
    "reduced_p",
    "reduced_adj_r2",
];
pub const TABLE8_HEADER: [&str; 7] = ["rq", "p", "q", "aic", "bic", "mase", "gmrae"];
pub const TABLE9_HEADER: [&str; 9] = ["rq", "p", "q", "test1", "test2", "test3", "test4", "test5", "test6"];

/// Finite numbers in shortest round-trip form (exponent notation for very
/// small or large magnitudes), anything else as `NA`.
pub fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:?}"),
        _ => "NA".into(),
    }
}

fn num(v: &Value) -> String {
    fmt_num(v.as_f64())
}

fn stage_file(stage: &str) -> String {
    format!("{stage}.json")
}

fn read_json(dir: &Path, name: &str) -> Result<Value> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| LabError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Data(format!("{}: {e}", path.display())))
}

/// Stages whose JSON is absent from `dir`.
pub fn missing_stages(dir: &Path) -> Vec<&'static str> {
    STAGES
        .iter()
        .copied()
        .filter(|s| !dir.join(stage_file(s)).is_file())
        .collect()
}

fn entries(v: &Value) -> &[Value] {
    v.as_array().map_or(&[], Vec::as_slice)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let err = |e: csv::Error| LabError::Data(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| LabError::Data(e.to_string()))
}

fn table2(dlm: &Value) -> Vec<Vec<String>> {
    entries(dlm)
        .iter()
        .map(|e| {
            let bp = &e["result"]["homoscedasticity"];
            vec![
                e["model"].as_str().unwrap_or("").into(),
                num(&bp["p_value"]),
                num(&bp["statistic"]),
            ]
        })
        .collect()
}

fn rollcorr_rows(entry: &Value) -> Vec<Vec<String>> {
    entries(&entry["result"]["rows"])
        .iter()
        .map(|r| {
            vec![
                format!(
                    "{} vs {}",
                    r["dependent"].as_str().unwrap_or(""),
                    r["regressor"].as_str().unwrap_or("")
                ),
                r["width"].to_string(),
                num(&r["sd_rolcor"]),
                num(&r["band_95"]),
                num(&r["band_05"]),
            ]
        })
        .collect()
}

/// `table3.csv`..`table6.csv` for RQ1..RQ4, `rollcorr_table_<name>.csv`
/// for custom models.
fn rollcorr_file(model: &str) -> String {
    match model.strip_prefix("RQ").and_then(|n| n.parse::<u32>().ok()) {
        Some(n @ 1..=4) => format!("table{}.csv", n + 2),
        _ => format!("rollcorr_table_{model}.csv"),
    }
}

fn table7(dlm: &Value, ardl: &Value) -> Vec<Vec<String>> {
    let row = |rq: &str, test: &str, r: &Value| {
        vec![
            rq.into(),
            test.into(),
            num(&r["full"]["f_stat"]),
            num(&r["full"]["f_pvalue"]),
            num(&r["full"]["adj_r2"]),
            num(&r["reduced"]["f_stat"]),
            num(&r["reduced"]["f_pvalue"]),
            num(&r["reduced"]["adj_r2"]),
        ]
    };
    let mut rows = Vec::new();
    for d in entries(dlm) {
        let rq = d["model"].as_str().unwrap_or("");
        rows.push(row(rq, "DLM", &d["result"]));
        let a = entries(ardl)
            .iter()
            .find(|a| a["model"] == d["model"])
            .map_or(&Value::Null, |a| &a["result"]);
        rows.push(row(rq, "ARDL-ECM", a));
    }
    rows
}

fn table8(ardl: &Value) -> Vec<Vec<String>> {
    entries(ardl)
        .iter()
        .map(|e| {
            let r = &e["result"];
            vec![
                e["model"].as_str().unwrap_or("").into(),
                num(&r["p"]),
                num(&r["q"]),
                num(&r["full"]["aic"]),
                num(&r["full"]["bic"]),
                num(&r["metrics"]["mase"]),
                num(&r["metrics"]["gmrae"]),
            ]
        })
        .collect()
}

fn table9(diag: &Value) -> Vec<Vec<String>> {
    entries(diag)
        .iter()
        .map(|e| {
            let r = &e["result"];
            let mut row = vec![e["model"].as_str().unwrap_or("").into(), num(&r["p"]), num(&r["q"])];
            for i in 0..6 {
                row.push(num(&r["tests"][i]["outcome"]["Ok"]["statistic"]));
            }
            row
        })
        .collect()
}

fn records(header: &[&str], rows: &[Vec<String>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                Value::Object(
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| ((*h).to_string(), Value::String(v.clone())))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Writes the table CSVs and `report.json` into `run_dir`.
pub fn emit_report(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let missing = missing_stages(run_dir);
    if !missing.is_empty() {
        return Err(LabError::Data(format!(
            "{} is not a completed run; missing stages: {}",
            run_dir.display(),
            missing.join(", ")
        )));
    }
    let dlm = read_json(run_dir, "dlm.json")?;
    let ardl = read_json(run_dir, "ardl.json")?;
    let rollcorr = read_json(run_dir, "rollcorr.json")?;
    let bounds = read_json(run_dir, "bounds.json")?;
    let diag = read_json(run_dir, "diagnostics.json")?;
    let impute = read_json(run_dir, "impute.json")?;
    let manifest = if run_dir.join(MANIFEST).is_file() {
        read_json(run_dir, MANIFEST)?
    } else {
        Value::Null
    };

    let mut files = Vec::new();
    let mut tables = serde_json::Map::new();
    let mut add = |name: String, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        files.push(Artifact {
            name: name.clone(),
            bytes: csv_bytes(header, &rows)?,
        });
        tables.insert(name, records(header, &rows));
        Ok(())
    };
    add("table2.csv".into(), &TABLE2_HEADER, table2(&dlm))?;
    for e in entries(&rollcorr) {
        let model = e["model"].as_str().unwrap_or("");
        add(rollcorr_file(model), &ROLLCORR_HEADER, rollcorr_rows(e))?;
    }
    add("table7.csv".into(), &TABLE7_HEADER, table7(&dlm, &ardl))?;
    add("table8.csv".into(), &TABLE8_HEADER, table8(&ardl))?;
    add("table9.csv".into(), &TABLE9_HEADER, table9(&diag))?;

    let errors: Vec<Value> = [("rollcorr", &rollcorr), ("dlm", &dlm), ("ardl", &ardl), ("bounds", &bounds), ("diagnostics", &diag)]
        .iter()
        .flat_map(|(stage, v)| {
            entries(v)
                .iter()
                .filter(|e| !e["error"].is_null())
                .map(move |e| json!({ "stage": stage, "model": e["model"], "error": e["error"] }))
        })
        .collect();
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "manifest": manifest,
        "notes": manifest["notes"],
        "imputation": impute,
        "tables": Value::Object(tables),
        "bounds": bounds,
        "errors": errors,
    });
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    bytes.push(b'\n');
    files.push(Artifact {
        name: "report.json".into(),
        bytes,
    });
    let written = commit_artifacts(run_dir, &files)?;
    Ok(written.into_iter().map(|r| run_dir.join(r.file)).collect())
}
