use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{Report, ReportError};

pub const REPORT_FILES: [&str; 6] = [
    "report.json",
    "accuracy.csv",
    "robustness.csv",
    "region_heatmap.csv",
    "scale_curve.csv",
    "positional_curve.csv",
];

#[derive(Serialize)]
struct AccuracyRow<'a> {
    model: &'a str,
    task: &'a str,
    slice: &'a str,
    n: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct RobustnessRow<'a> {
    model: &'a str,
    task: &'a str,
    dimension: &'a str,
    consistency: Option<f64>,
    semantic_stability: Option<f64>,
    token_stability: Option<f64>,
    robustness: Option<f64>,
}

#[derive(Serialize)]
struct HeatRow<'a> {
    model: &'a str,
    task: &'a str,
    row: usize,
    col: usize,
    x: f64,
    y: f64,
    n: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct ScaleRow<'a> {
    model: &'a str,
    task: &'a str,
    scale: &'a str,
    n: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    model: &'a str,
    task: &'a str,
    index: usize,
    n: usize,
    accuracy: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ReportError> {
    let csv_err = |e: csv::Error| ReportError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(!rows.is_empty())
        .from_path(path)
        .map_err(csv_err)?;
    if rows.is_empty() {
        w.write_record(header).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `report.json` and the flat CSV views into `dir`. Output is a pure
/// function of the report, so rescoring the same inputs is byte-identical.
pub fn write_report(report: &Report, dir: &Path) -> Result<(), ReportError> {
    let io = |source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    let path = dir.join("report.json");
    fs::write(&path, json).map_err(|source| ReportError::Io { path, source })?;

    let (mut acc, mut rob, mut heat, mut scale, mut pos) = (vec![], vec![], vec![], vec![], vec![]);
    for (model, tasks) in &report.models {
        for (task, t) in tasks {
            acc.push(AccuracyRow { model, task, slice: "all", n: t.records, accuracy: t.accuracy });
            for s in &t.breakdown {
                acc.push(AccuracyRow { model, task, slice: &s.value, n: s.n, accuracy: s.accuracy });
            }
            for (dimension, d) in &t.dimensions {
                rob.push(RobustnessRow {
                    model,
                    task,
                    dimension,
                    consistency: d.consistency,
                    semantic_stability: d.semantic_stability,
                    token_stability: d.token_stability,
                    robustness: d.robustness,
                });
            }
            for c in &t.heatmap {
                heat.push(HeatRow {
                    model,
                    task,
                    row: c.row,
                    col: c.col,
                    x: c.x,
                    y: c.y,
                    n: c.n,
                    accuracy: c.accuracy,
                });
            }
            if let Some(d) = t.dimensions.get("scale") {
                for s in &d.values {
                    scale.push(ScaleRow { model, task, scale: &s.value, n: s.n, accuracy: s.accuracy });
                }
            }
            if let Some(p) = &t.path {
                for c in &p.positional_curve {
                    pos.push(CurveRow { model, task, index: c.index, n: c.n, accuracy: c.accuracy });
                }
            }
        }
    }
    write_csv(&dir.join("accuracy.csv"), &acc, &["model", "task", "slice", "n", "accuracy"])?;
    write_csv(
        &dir.join("robustness.csv"),
        &rob,
        &["model", "task", "dimension", "consistency", "semantic_stability", "token_stability", "robustness"],
    )?;
    write_csv(
        &dir.join("region_heatmap.csv"),
        &heat,
        &["model", "task", "row", "col", "x", "y", "n", "accuracy"],
    )?;
    write_csv(&dir.join("scale_curve.csv"), &scale, &["model", "task", "scale", "n", "accuracy"])?;
    write_csv(&dir.join("positional_curve.csv"), &pos, &["model", "task", "index", "n", "accuracy"])
}
