//! The robustness metrics on small hand-made inputs.
//!
//!     cargo run --example metrics

use v2r::metrics::{
    aggregate_robustness, consistency, path_metrics, region_bias, semantic_stability, token_stability,
    HashedBagOfWords, StabilityScores,
};
use v2r::model::{Point, Weights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let per_scale = [0.92, 0.88, 0.75, 0.41, 0.30, 0.22];
    let c = consistency(&per_scale)?;
    println!("accuracy per scale {per_scale:?} -> consistency {c:.4}");

    let answers = ["the arrow points left", "it points left", "pointing up and left"];
    let t = token_stability(&answers)?;
    let pairs: Vec<(String, &str)> = answers.iter().enumerate().map(|(i, a)| (i.to_string(), *a)).collect();
    let s = semantic_stability(&pairs, &HashedBagOfWords::default())?;
    println!("answers {answers:?} -> token {t:.4}, semantic {s:.4}");

    let scores = StabilityScores { consistency: Some(c), semantic: Some(s), token: Some(t), judge: None };
    println!("robustness {:.4}", aggregate_robustness(&scores, &Weights::default())?);

    let gt = [Point::new2(0, 0), Point::new2(3, 1), Point::new2(5, 5)];
    let pred = [Point::new2(0, 0), Point::new2(5, 5), Point::new2(3, 1)];
    println!("path {:?}", path_metrics(Some(&pred[..]), &gt)?);

    let heat = vec![vec![0.4, 0.5, 0.4], vec![0.6, 0.9, 0.5], vec![0.3, 0.5, 0.4]];
    println!("region bias {:?}", region_bias(&heat)?);
    Ok(())
}
