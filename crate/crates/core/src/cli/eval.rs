use std::path::Path;

use super::{io, load_config, usage, CliError, EvalArgs};
use crate::harness::{
    run_eval, write_outputs, AnswerParser, Endpoint, EndpointConfig, EndpointConfigError,
    EndpointError, EvalOptions, HarnessError, HttpEndpoint, PromptTable, Request, DEFAULT_SYNONYMS,
};
use crate::model::read_manifest;

/// Answers every request with the same text; model id `mock`.
pub struct ConstantEndpoint {
    pub text: String,
}

impl Endpoint for ConstantEndpoint {
    fn model_id(&self) -> &str {
        "mock"
    }

    fn complete(&self, _: &Request) -> Result<String, EndpointError> {
        Ok(self.text.clone())
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn endpoint_config(args: &EvalArgs) -> Result<EndpointConfig, CliError> {
    let mut cfg = match &args.endpoint {
        Some(p) => toml::from_str::<EndpointConfig>(&read_text(p)?)
            .map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => EndpointConfig::default(),
    };
    if let Some(v) = &args.base_url {
        cfg.base_url = v.clone();
    }
    if let Some(v) = &args.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &args.auth_env {
        cfg.auth_env = Some(v.clone());
    }
    if args.no_auth {
        cfg.auth_env = None;
    }
    if let Some(v) = args.in_flight {
        cfg.max_in_flight = v;
    }
    if let Some(v) = args.max_attempts {
        cfg.retry.max_attempts = v;
    }
    Ok(cfg)
}

pub fn run(args: EvalArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.max_failure_rate) {
        return Err(usage("--max-failure-rate must lie in [0, 1]"));
    }
    let config = load_config(args.config.as_ref())?;
    let cfg = endpoint_config(&args)?;
    let endpoint: Box<dyn Endpoint> = match &args.mock {
        Some(text) => Box::new(ConstantEndpoint { text: text.clone() }),
        None => Box::new(HttpEndpoint::new(cfg.clone()).map_err(|e| match e {
            EndpointConfigError::Client(_) => io(e),
            _ => usage(e),
        })?),
    };
    let synonyms = match &args.synonyms {
        Some(p) => read_text(p)?,
        None => DEFAULT_SYNONYMS.to_string(),
    };
    let parser = AnswerParser::new(&config.classes, &config.campaign.text_words, &synonyms).map_err(usage)?;
    let prompts = match &args.prompts {
        Some(p) => PromptTable::from_toml_str(&read_text(p)?).map_err(usage)?,
        None => PromptTable::default(),
    };

    let records = read_manifest(&args.manifest).map_err(io)?;
    let manifest_dir = args.manifest.parent().unwrap_or(Path::new("."));
    let opts = EvalOptions {
        max_in_flight: args.in_flight.unwrap_or(cfg.max_in_flight).max(1),
        retry: cfg.retry,
        cache_path: args.cache.clone(),
    };
    let run = run_eval(&records, manifest_dir, endpoint.as_ref(), &parser, &prompts, &opts).map_err(|e| match e {
        HarnessError::UnknownPrompt(_) | HarnessError::Prompts(_) => usage(e),
        _ => io(e),
    })?;
    write_outputs(&run.outputs, &args.out).map_err(io)?;
    let s = &run.summary;
    println!(
        "{} records: {} cached, {} requested, {} failed, {} unparseable -> {}",
        s.total,
        s.cached,
        s.requested,
        s.failed,
        s.unparseable,
        args.out.display()
    );
    if s.total > 0 && s.failed as f64 / s.total as f64 > args.max_failure_rate {
        return Err(CliError::Endpoint(format!(
            "{} of {} records failed (threshold {})",
            s.failed, s.total, args.max_failure_rate
        )));
    }
    Ok(())
}
