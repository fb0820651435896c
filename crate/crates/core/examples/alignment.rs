//! Alignment gap between paired image / caption features and class cluster separation.
//!
//!     cargo run --example alignment

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2r::diagnostics::{alignment_gap, cluster_stats, Matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (n, d) = (40, 8);
    let mut image = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let class = i % 4;
        image.push((0..d).map(|j| if j == class { 3.0 } else { 0.0 } + rng.gen_range(-1.0..1.0)).collect::<Vec<f32>>());
        labels.push(format!("class{class}"));
    }
    for noise in [0.1f32, 1.0, 5.0] {
        let caption: Vec<Vec<f32>> =
            image.iter().map(|r| r.iter().map(|v| v + rng.gen_range(-noise..noise)).collect()).collect();
        let gap = alignment_gap(&Matrix::from_rows(&image)?, &Matrix::from_rows(&caption)?)?;
        println!("caption noise {noise:>4}: matched {:.3}, mismatched {:.3}, gap {:.3}", gap.mean_matched_cosine, gap.mean_mismatched_cosine, gap.gap);
    }
    println!("{:?}", cluster_stats(&Matrix::from_rows(&image)?, &labels)?);
    Ok(())
}
