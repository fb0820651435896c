use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::ReportError;
use crate::harness::{is_correct, ModelOutput, ParsedAnswer};
use crate::metrics::{
    aggregate_robustness, consistency, ocr_fidelity, path_metrics, point_accuracy,
    positional_accuracy_curve, region_bias_partial, semantic_stability, token_stability, Embedder,
    RegionBias, StabilityScores,
};
use crate::model::{GroundTruth, ManifestHeader, SampleRecord, Task, TaskParams, Variation, Weights};
use crate::synth::OcrTaskSpec;

/// The four variation dimensions, in report order.
pub const DIMENSIONS: [&str; 4] = ["position", "scale", "rotation", "context"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slice {
    pub value: String,
    pub n: usize,
    pub accuracy: f64,
}

/// Accuracy per value of one dimension and the robustness components over it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub values: Vec<Slice>,
    pub consistency: Option<f64>,
    pub semantic_stability: Option<f64>,
    pub token_stability: Option<f64>,
    pub robustness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatCell {
    pub row: usize,
    pub col: usize,
    pub x: f64,
    pub y: f64,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub index: usize,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub ema: f64,
    pub pm_ia: f64,
    pub pm_sa: f64,
    pub positional_curve: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcrSummary {
    pub slice: String,
    pub n: usize,
    pub reported_as_written: f64,
    pub inferred_correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskReport {
    pub records: usize,
    pub correct: usize,
    /// Correct answers over all records; failed and missing count as wrong.
    pub accuracy: f64,
    pub failed: usize,
    pub missing: usize,
    pub unparseable: usize,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub dimensions: BTreeMap<String, DimensionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robustness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_bias: Option<RegionBias>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub heatmap: Vec<HeatCell>,
    /// Accuracy per generation setting or question kind.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub breakdown: Vec<Slice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ocr: Vec<OcrSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub manifest_records: usize,
    pub weights: Weights,
    /// Files the report was computed from; numbers trace back to them by sample id.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<InputFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputFile {
    pub role: String,
    pub file: String,
    pub records: usize,
}

/// Scores for every model and task found in the outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub metadata: ReportMetadata,
    pub models: BTreeMap<String, BTreeMap<String, TaskReport>>,
}

pub struct ScoreOptions<'a> {
    pub weights: Weights,
    pub embedder: &'a dyn Embedder,
    pub header: Option<&'a ManifestHeader>,
}

struct Scored<'a> {
    record: &'a SampleRecord,
    output: Option<&'a ModelOutput>,
    correct: bool,
}

fn fraction(hits: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        hits as f64 / n as f64
    }
}

fn dimension_value(v: &Variation, dim: &str) -> String {
    match dim {
        "position" => format!("({}, {})", v.position.x, v.position.y),
        "scale" => v.scale.to_string(),
        "rotation" => v.rotation.to_string(),
        _ => v.context.clone(),
    }
}

/// Numeric order for numeric dimensions, `(y, x)` for positions.
fn dimension_sort_key(v: &Variation, dim: &str) -> (f64, f64, String) {
    match dim {
        "position" => (v.position.y, v.position.x, String::new()),
        "scale" => (v.scale, 0.0, String::new()),
        "rotation" => (v.rotation, 0.0, String::new()),
        _ => (0.0, 0.0, v.context.clone()),
    }
}

fn params_label(p: &TaskParams) -> String {
    match p {
        TaskParams::Coordinate { dims, range, grid, reference_lines } => format!(
            "{dims}d {range}{}{}",
            if *grid { " grid" } else { "" },
            if *reference_lines { " reference-lines" } else { "" }
        ),
        TaskParams::Path { n, range } => format!("n{n} {range}"),
        TaskParams::TextMatrix { size, background } => {
            let bg = serde_json::to_value(background).expect("serializes");
            format!("{size}x{size} {}", bg.as_str().unwrap_or_default())
        }
        TaskParams::Ocr { blur } => {
            let b = serde_json::to_value(blur).expect("serializes");
            b.as_str().unwrap_or_default().to_string()
        }
    }
}

fn slices<K: Ord>(items: impl Iterator<Item = (K, String, bool)>) -> Vec<Slice> {
    let mut groups: BTreeMap<K, (String, usize, usize)> = BTreeMap::new();
    for (key, label, ok) in items {
        let e = groups.entry(key).or_insert((label, 0, 0));
        e.1 += 1;
        e.2 += usize::from(ok);
    }
    groups
        .into_values()
        .map(|(value, n, hits)| Slice {
            value,
            n,
            accuracy: fraction(hits, n),
        })
        .collect()
}

#[derive(PartialEq, PartialOrd)]
struct OrdKey((f64, f64, String));

impl Eq for OrdKey {}

impl Ord for OrdKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let (a, b) = (&self.0, &other.0);
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    }
}

fn dimension_report(
    items: &[Scored],
    dim: &str,
    opts: &ScoreOptions,
) -> Result<Option<DimensionReport>, ReportError> {
    let with_var: Vec<(&Scored, &Variation)> = items
        .iter()
        .filter_map(|s| s.record.variation.as_ref().map(|v| (s, v)))
        .collect();
    if with_var.is_empty() {
        return Ok(None);
    }
    let values = slices(with_var.iter().map(|(s, v)| {
        (OrdKey(dimension_sort_key(v, dim)), dimension_value(v, dim), s.correct)
    }));
    let consistency_score = if values.len() >= 2 {
        Some(consistency(&values.iter().map(|s| s.accuracy).collect::<Vec<_>>())?)
    } else {
        None
    };

    // output-stability groups: same source and the other three dimensions fixed
    let mut groups: BTreeMap<(String, Vec<String>), Vec<(&str, &str)>> = BTreeMap::new();
    for (s, v) in &with_var {
        let Some(raw) = s.output.and_then(|o| o.raw.as_deref()) else {
            continue;
        };
        let others: Vec<String> = DIMENSIONS
            .iter()
            .filter(|d| **d != dim)
            .map(|d| dimension_value(v, d))
            .collect();
        let source = s.record.source.clone().unwrap_or_default();
        groups
            .entry((source, others))
            .or_default()
            .push((s.record.id.as_str(), raw));
    }
    let (mut sem, mut tok, mut n) = (0.0, 0.0, 0usize);
    for members in groups.values().filter(|m| m.len() >= 2) {
        sem += semantic_stability(members, opts.embedder)?;
        let texts: Vec<&str> = members.iter().map(|(_, t)| *t).collect();
        tok += token_stability(&texts)?;
        n += 1;
    }
    let (semantic, token) = if n > 0 {
        (Some(sem / n as f64), Some(tok / n as f64))
    } else {
        (None, None)
    };
    let scores = StabilityScores {
        consistency: consistency_score,
        semantic,
        token,
        judge: None,
    };
    let robustness = aggregate_robustness(&scores, &opts.weights).ok();
    Ok(Some(DimensionReport {
        values,
        consistency: consistency_score,
        semantic_stability: semantic,
        token_stability: token,
        robustness,
    }))
}

/// Per-anchor accuracy on the grid implied by the distinct anchor coordinates.
fn heatmap(items: &[Scored]) -> (Vec<HeatCell>, Option<RegionBias>) {
    let anchors: Vec<(f64, f64, bool)> = items
        .iter()
        .filter_map(|s| s.record.variation.as_ref().map(|v| (v.position.x, v.position.y, s.correct)))
        .collect();
    if anchors.is_empty() {
        return (Vec::new(), None);
    }
    let distinct = |f: fn(&(f64, f64, bool)) -> f64| {
        let mut v: Vec<f64> = anchors.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (xs, ys) = (distinct(|a| a.0), distinct(|a| a.1));
    let mut cells: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for (x, y, ok) in &anchors {
        let col = xs.iter().position(|v| v == x).expect("listed");
        let row = ys.iter().position(|v| v == y).expect("listed");
        let e = cells.entry((row, col)).or_default();
        e.0 += 1;
        e.1 += usize::from(*ok);
    }
    let heat: Vec<HeatCell> = cells
        .iter()
        .map(|(&(row, col), &(n, hits))| HeatCell {
            row,
            col,
            x: xs[col],
            y: ys[row],
            n,
            accuracy: fraction(hits, n),
        })
        .collect();
    let bias = (xs.len() == ys.len() && xs.len() >= 3)
        .then(|| {
            let g = xs.len();
            let mut map = vec![vec![None; g]; g];
            for c in &heat {
                map[c.row][c.col] = Some(c.accuracy);
            }
            region_bias_partial(&map).ok()
        })
        .flatten();
    (heat, bias)
}

fn parsed<'a>(s: &Scored<'a>) -> Option<&'a ParsedAnswer> {
    s.output.map(|o| &o.parsed)
}

fn task_report(items: &[Scored], opts: &ScoreOptions) -> Result<TaskReport, ReportError> {
    let task = items[0].record.task;
    let records = items.len();
    let correct = items.iter().filter(|s| s.correct).count();
    let missing = items.iter().filter(|s| s.output.is_none()).count();
    let failed = items.iter().filter(|s| s.output.is_some_and(|o| o.failed())).count();
    let unparseable = items
        .iter()
        .filter(|s| s.output.is_some_and(|o| !o.failed() && o.parsed.is_unparseable()))
        .count();

    let mut dimensions = BTreeMap::new();
    for dim in DIMENSIONS {
        if let Some(d) = dimension_report(items, dim, opts)? {
            dimensions.insert(dim.to_string(), d);
        }
    }
    let robust: Vec<f64> = dimensions.values().filter_map(|d| d.robustness).collect();
    let robustness = (!robust.is_empty()).then(|| robust.iter().sum::<f64>() / robust.len() as f64);
    let (heat, region) = heatmap(items);

    let breakdown = match task {
        Task::TextMatrix => slices(items.iter().map(|s| {
            let key = (s.record.prompt_id.clone(), s.record.params.as_ref().map(params_label));
            let label = match &key.1 {
                Some(p) => format!("{} {p}", key.0),
                None => key.0.clone(),
            };
            (key, label, s.correct)
        })),
        _ => slices(items.iter().filter_map(|s| {
            s.record.params.as_ref().map(|p| (params_label(p), params_label(p), s.correct))
        })),
    };

    let point_acc = if task == Task::Coordinate {
        let preds: Vec<Option<_>> = items
            .iter()
            .map(|s| match parsed(s) {
                Some(ParsedAnswer::Coordinate(p)) => Some(p.clone()),
                _ => None,
            })
            .collect();
        let gts: Vec<_> = items
            .iter()
            .map(|s| match &s.record.ground_truth {
                GroundTruth::Coordinate(p) => p.clone(),
                _ => unreachable!("validated manifest"),
            })
            .collect();
        Some(point_accuracy(&preds, &gts)?)
    } else {
        None
    };

    let path = if task == Task::Path {
        let pairs: Vec<(Option<&[crate::harness::ParsedPoint]>, &[crate::model::Point])> = items
            .iter()
            .map(|s| {
                let pred = match parsed(s) {
                    Some(ParsedAnswer::Path(p)) => Some(p.as_slice()),
                    _ => None,
                };
                let gt = match &s.record.ground_truth {
                    GroundTruth::Path(g) => g.as_slice(),
                    _ => unreachable!("validated manifest"),
                };
                (pred, gt)
            })
            .collect();
        let (mut ema, mut ia, mut sa) = (0.0, 0.0, 0.0);
        for (pred, gt) in &pairs {
            let e = path_metrics(*pred, gt)?;
            ema += e.ema;
            ia += e.pm_ia;
            sa += e.pm_sa;
        }
        let n = pairs.len() as f64;
        let curve = positional_accuracy_curve(&pairs);
        let counts: Vec<usize> = (0..curve.len())
            .map(|i| pairs.iter().filter(|(_, g)| g.len() > i).count())
            .collect();
        Some(PathSummary {
            ema: ema / n,
            pm_ia: ia / n,
            pm_sa: sa / n,
            positional_curve: curve
                .into_iter()
                .zip(counts)
                .enumerate()
                .map(|(index, (accuracy, n))| CurvePoint { index, n, accuracy })
                .collect(),
        })
    } else {
        None
    };

    let ocr = if task == Task::Ocr {
        let mut by_blur: BTreeMap<String, (usize, f64, f64)> = BTreeMap::new();
        for s in items {
            let (GroundTruth::Ocr { source_text, replacements }, Some(TaskParams::Ocr { blur })) =
                (&s.record.ground_truth, &s.record.params)
            else {
                continue;
            };
            let spec = OcrTaskSpec {
                text: source_text.clone(),
                replacements: replacements.clone(),
                blur: *blur,
            };
            let raw = s.output.and_then(|o| o.raw.as_deref()).unwrap_or("");
            let f = ocr_fidelity(raw, &spec);
            let e = by_blur.entry(params_label(s.record.params.as_ref().unwrap())).or_default();
            e.0 += 1;
            e.1 += f.reported_as_written;
            e.2 += f.inferred_correction;
        }
        by_blur
            .into_iter()
            .map(|(slice, (n, kept, fixed))| OcrSummary {
                slice,
                n,
                reported_as_written: kept / n as f64,
                inferred_correction: fixed / n as f64,
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(TaskReport {
        records,
        correct,
        accuracy: fraction(correct, records),
        failed,
        missing,
        unparseable,
        dimensions,
        robustness,
        region_bias: region,
        heatmap: heat,
        breakdown,
        point_accuracy: point_acc,
        path,
        ocr,
    })
}

/// Joins outputs to manifest records by id and scores every (model, task).
///
/// Outputs naming unknown records are an error; records without an output
/// for a model count as wrong and are reported as missing.
pub fn score(records: &[SampleRecord], outputs: &[ModelOutput], opts: &ScoreOptions) -> Result<Report, ReportError> {
    let known: BTreeSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let mut by_model: BTreeMap<&str, HashMap<&str, &ModelOutput>> = BTreeMap::new();
    for o in outputs {
        if !known.contains(o.sample_id.as_str()) {
            return Err(ReportError::UnknownSample(o.sample_id.clone()));
        }
        if by_model
            .entry(o.model.as_str())
            .or_default()
            .insert(o.sample_id.as_str(), o)
            .is_some()
        {
            return Err(ReportError::DuplicateOutput {
                model: o.model.clone(),
                id: o.sample_id.clone(),
            });
        }
    }
    let mut models = BTreeMap::new();
    for (model, outs) in by_model {
        let mut per_task: BTreeMap<Task, Vec<Scored>> = BTreeMap::new();
        for record in records {
            let output = outs.get(record.id.as_str()).copied();
            let correct = output.is_some_and(|o| is_correct(record, &o.parsed));
            per_task.entry(record.task).or_default().push(Scored { record, output, correct });
        }
        let mut tasks = BTreeMap::new();
        for (task, items) in per_task {
            tasks.insert(task.to_string(), task_report(&items, opts)?);
        }
        models.insert(model.to_string(), tasks);
    }
    Ok(Report {
        metadata: ReportMetadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: opts.header.map(|h| h.seed),
            config_hash: opts.header.map(|h| h.config_hash.clone()),
            manifest_records: records.len(),
            weights: opts.weights,
            inputs: Vec::new(),
        },
        models,
    })
}
