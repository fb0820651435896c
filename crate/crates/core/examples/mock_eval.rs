//! Runs the evaluation harness against an in-process endpoint that answers
//! "right" to everything, then prints the parsed outputs.
//!
//!     cargo run --example mock_eval

use v2r::harness::{run_eval, AnswerParser, Endpoint, EndpointError, EvalOptions, PromptTable, Request};
use v2r::model::{build_variation_space, RunConfig, Task};
use v2r::variation::{enumerate_variants, placeholder, BackgroundBank, EnumerateOptions};

struct AlwaysRight;

impl Endpoint for AlwaysRight {
    fn model_id(&self) -> &str {
        "always-right"
    }

    fn complete(&self, _: &Request) -> Result<String, EndpointError> {
        Ok("The arrow points to the right.".into())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let config = RunConfig {
        grid: 3,
        scales: vec![0.2],
        rotations: vec![0.0, 90.0],
        ..RunConfig::default()
    };
    let space = build_variation_space(&config, (672, 672))?;
    let opts = EnumerateOptions {
        task: Task::Direction,
        out_dir: dir.path().to_path_buf(),
        master_seed: 1,
        index_offset: 0,
        prompt_id: "direction".into(),
    };
    let records = enumerate_variants(&placeholder::arrow_asset(), &BackgroundBank::new(), &space, &opts)?.records;
    let run = run_eval(
        &records,
        dir.path(),
        &AlwaysRight,
        &AnswerParser::default(),
        &PromptTable::default(),
        &EvalOptions::default(),
    )?;
    for (r, o) in records.iter().zip(&run.outputs) {
        println!("{:<36} truth {:<12} parsed {:?}", r.id, serde_json::to_string(&r.ground_truth)?, o.parsed);
    }
    println!("{:?}", run.summary);
    Ok(())
}
