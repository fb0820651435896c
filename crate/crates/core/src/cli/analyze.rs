use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{io, load_config, usage, AlignmentArgs, CliError, DecodeArgs, ProbeArgs, ScoreArgs};
use crate::diagnostics::{
    alignment_gap, check_vocab, cluster_stats, decode_feature, principal_projection,
    probe_accuracy, read_vmat_checked, read_vocab, train_linear_probe, write_projection_csv,
    AlignmentGap, ClusterStats, DiagnosticsError, Matrix, MatrixError, Probe, ProbeConfig,
};
use crate::harness::read_outputs;
use crate::metrics::HashedBagOfWords;
use crate::model::read_manifest_full;
use crate::report::{score as score_report, write_report, InputFile, ReportError, ScoreOptions};

fn diag(e: impl Into<DiagnosticsError>) -> CliError {
    match e.into() {
        e @ DiagnosticsError::Matrix(_) => io(e),
        e => usage(e),
    }
}

fn matrix(path: &Path) -> Result<Matrix, CliError> {
    read_vmat_checked(path)
        .map(|(m, _)| m)
        .map_err(|e| io(format!("{}: {e}", path.display())))
}

fn labels(path: &Path) -> Result<Vec<String>, CliError> {
    read_vocab(path).map_err(|e: MatrixError| io(e))
}

fn input(role: &str, path: &Path, records: usize) -> InputFile {
    InputFile {
        role: role.into(),
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        records,
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serializes") + "\n";
    std::fs::write(path, text).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn percent(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

pub fn score(args: ScoreArgs) -> Result<(), CliError> {
    let config = load_config(args.config.as_ref())?;
    let manifest = read_manifest_full(&args.manifest).map_err(io)?;
    let mut outputs = Vec::new();
    let mut inputs = vec![input("manifest", &args.manifest, manifest.records.len())];
    for p in &args.outputs {
        let batch = read_outputs(p).map_err(io)?;
        inputs.push(input("outputs", p, batch.len()));
        outputs.extend(batch);
    }
    let embedder = HashedBagOfWords::default();
    let opts = ScoreOptions {
        weights: config.weights,
        embedder: &embedder,
        header: manifest.header.as_ref(),
    };
    let mut report = score_report(&manifest.records, &outputs, &opts).map_err(|e| match e {
        ReportError::Io { .. } => io(e),
        _ => usage(e),
    })?;
    report.metadata.inputs = inputs;
    write_report(&report, &args.out).map_err(io)?;
    for (model, tasks) in &report.models {
        for (task, t) in tasks {
            let robustness = t.robustness.map(percent).unwrap_or_else(|| "-".into());
            println!(
                "{model} {task}: accuracy {} ({}/{}), robustness {robustness}, missing {}, failed {}",
                percent(t.accuracy),
                t.correct,
                t.records,
                t.missing,
                t.failed
            );
        }
    }
    println!("report written to {}", args.out.display());
    Ok(())
}

pub fn decode(args: DecodeArgs) -> Result<(), CliError> {
    let features = matrix(&args.features)?;
    let embeddings = matrix(&args.embeddings)?;
    let vocab = labels(&args.vocab)?;
    check_vocab(&vocab, &embeddings).map_err(usage)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
    }
    let csv_err = |e: csv::Error| io(format!("{}: {e}", args.out.display()));
    let mut w = csv::Writer::from_path(&args.out).map_err(csv_err)?;
    w.write_record(["feature", "rank", "index", "token", "probability"]).map_err(csv_err)?;
    for i in 0..features.rows() {
        let top = decode_feature(features.row(i), &embeddings, &vocab, args.top_k).map_err(diag)?;
        for (rank, t) in top.iter().enumerate() {
            w.write_record([
                i.to_string(),
                (rank + 1).to_string(),
                t.index.to_string(),
                t.token.clone(),
                t.probability.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| io(format!("{}: {e}", args.out.display())))?;
    println!("decoded {} features into {}", features.rows(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct ProbeReport {
    train_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_accuracy: Option<f64>,
    config: ProbeConfig,
    probe: Probe,
}

pub fn probe(args: ProbeArgs) -> Result<(), CliError> {
    let x = matrix(&args.features)?;
    let y = labels(&args.labels)?;
    let mut cfg = ProbeConfig::default();
    if let Some(v) = args.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = args.max_iter {
        cfg.max_iter = v;
    }
    let probe = train_linear_probe(&x, &y, &cfg).map_err(diag)?;
    let train_accuracy = probe_accuracy(&probe, &x, &y).map_err(diag)?;
    let test_accuracy = match (&args.test_features, &args.test_labels) {
        (Some(f), Some(l)) => Some(probe_accuracy(&probe, &matrix(f)?, &labels(l)?).map_err(diag)?),
        _ => None,
    };
    println!(
        "probe: {} classes, {} iterations{}, train accuracy {}{}",
        probe.classes.len(),
        probe.iterations,
        if probe.converged { "" } else { " (not converged)" },
        percent(train_accuracy),
        test_accuracy.map(|a| format!(", test accuracy {}", percent(a))).unwrap_or_default()
    );
    write_json(&ProbeReport { train_accuracy, test_accuracy, config: cfg, probe }, &args.out)
}

#[derive(Serialize)]
struct AlignmentReport {
    rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alignment: Option<AlignmentGap>,
    #[serde(skip_serializing_if = "Option::is_none")]
    clusters: Option<ClusterStats>,
}

pub fn alignment(args: AlignmentArgs) -> Result<(), CliError> {
    let h = matrix(&args.image_features)?;
    let alignment = match &args.caption_features {
        Some(p) => Some(alignment_gap(&h, &matrix(p)?).map_err(diag)?),
        None => None,
    };
    let row_labels = match &args.labels {
        Some(p) => Some(labels(p)?),
        None => None,
    };
    let clusters = match &row_labels {
        Some(l) => Some(cluster_stats(&h, l).map_err(diag)?),
        None => None,
    };
    std::fs::create_dir_all(&args.out).map_err(|e| io(format!("{}: {e}", args.out.display())))?;
    let ids: Vec<String> = (0..h.rows()).map(|i| i.to_string()).collect();
    let l = row_labels.unwrap_or_else(|| vec![String::new(); h.rows()]);
    let projection_path: PathBuf = args.out.join("projection.csv");
    write_projection_csv(&projection_path, &ids, &l, &principal_projection(&h)).map_err(diag)?;
    if let Some(a) = &alignment {
        println!(
            "alignment: matched {:.4}, mismatched {:.4}, gap {:.4}",
            a.mean_matched_cosine, a.mean_mismatched_cosine, a.gap
        );
    }
    if let Some(c) = &clusters {
        println!(
            "clusters: intra {:.4}, inter {:.4}, ratio {:.4}",
            c.intra_class_mean_dist, c.inter_class_mean_dist, c.ratio
        );
    }
    write_json(
        &AlignmentReport { rows: h.rows(), alignment, clusters },
        &args.out.join("alignment.json"),
    )
}
