//! Trains a linear probe on the bundled feature fixture and reports held-out accuracy.
//!
//!     cargo run --example probe

use std::path::Path;

use v2r::diagnostics::{probe_accuracy, read_vmat_checked, read_vocab, train_linear_probe, Matrix, ProbeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let (x, sidecar) = read_vmat_checked(&fixtures.join("probe_features.vmat"))?;
    let labels = read_vocab(&fixtures.join("probe_labels.txt"))?;
    if let Some(s) = sidecar {
        println!("{}x{} features from {} at {}", s.rows, s.cols, s.model, s.capture_point);
    }
    let split = x.rows() * 4 / 5;
    let rows = |r: std::ops::Range<usize>| Matrix::from_rows(&r.map(|i| x.row(i).to_vec()).collect::<Vec<_>>());
    let (train, test) = (rows(0..split)?, rows(split..x.rows())?);
    let probe = train_linear_probe(&train, &labels[..split], &ProbeConfig::default())?;
    println!("train accuracy {:.3}", probe_accuracy(&probe, &train, &labels[..split])?);
    println!("test accuracy  {:.3}", probe_accuracy(&probe, &test, &labels[split..])?);
    Ok(())
}
