//! Decodes feature rows into vocabulary tokens through an embedding matrix.
//!
//!     cargo run --example decode

use v2r::diagnostics::{decode_feature, Matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vocab: Vec<String> = ["cat", "dog", "car", "left", "right"].iter().map(|s| s.to_string()).collect();
    // token embeddings: the animals share an axis, directions share another
    let embeddings = Matrix::from_rows(&[
        vec![1.0, 0.2, 0.0],
        vec![0.9, 0.3, 0.0],
        vec![0.1, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.1, -1.0],
    ])?;
    for h in [vec![2.0, 0.5, 0.0], vec![0.0, 0.2, 3.0]] {
        let top = decode_feature(&h, &embeddings, &vocab, 3)?;
        let shown: Vec<String> = top.iter().map(|t| format!("{} {:.3}", t.token, t.probability)).collect();
        println!("{h:?} -> {}", shown.join(", "));
    }
    Ok(())
}
