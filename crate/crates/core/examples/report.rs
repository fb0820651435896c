//! Scores a set of outputs against a manifest and writes the report files.
//!
//!     cargo run --example report -- [out_dir]

use std::path::PathBuf;

use v2r::harness::{run_eval, AnswerParser, Endpoint, EndpointError, EvalOptions, PromptTable, Request};
use v2r::metrics::HashedBagOfWords;
use v2r::model::{build_variation_space, RunConfig, Task, Weights};
use v2r::report::{score, write_report, ScoreOptions, REPORT_FILES};
use v2r::variation::{enumerate_variants, placeholder, BackgroundBank, EnumerateOptions};

/// Gets the direction right only for the two upper anchor rows.
struct TopHeavy;

impl Endpoint for TopHeavy {
    fn model_id(&self) -> &str {
        "top-heavy"
    }

    fn complete(&self, r: &Request) -> Result<String, EndpointError> {
        let png = r.image_png.as_ref().expect("image");
        let img = image::load_from_memory(png).map_err(|e| EndpointError::Fatal(e.to_string()))?.to_rgb8();
        let dark_top = (0..img.height() * 2 / 3).any(|y| (0..img.width()).any(|x| img.get_pixel(x, y)[0] < 128));
        Ok(if dark_top { "right" } else { "left" }.into())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/report".into()).into();
    let data = tempfile::tempdir()?;
    let config = RunConfig { grid: 3, scales: vec![0.2], rotations: vec![0.0], ..RunConfig::default() };
    let space = build_variation_space(&config, (672, 672))?;
    let opts = EnumerateOptions {
        task: Task::Direction,
        out_dir: data.path().to_path_buf(),
        master_seed: 5,
        index_offset: 0,
        prompt_id: "direction".into(),
    };
    let records = enumerate_variants(&placeholder::arrow_asset(), &BackgroundBank::new(), &space, &opts)?.records;
    let run = run_eval(&records, data.path(), &TopHeavy, &AnswerParser::default(), &PromptTable::default(), &EvalOptions::default())?;

    let embedder = HashedBagOfWords::default();
    let report = score(&records, &run.outputs, &ScoreOptions { weights: Weights::default(), embedder: &embedder, header: None })?;
    write_report(&report, &out)?;
    let task = &report.models["top-heavy"]["direction"];
    println!("accuracy {:.3}, region bias {:?}", task.accuracy, task.region_bias);
    println!("wrote {} to {}", REPORT_FILES.join(", "), out.display());
    Ok(())
}
