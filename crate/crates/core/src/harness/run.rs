use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::answer::{AnswerParser, ParsedAnswer};
use super::endpoint::{complete_with_retry, Endpoint, Request, RetryPolicy};
use super::prompt::{prompt_hash, PromptTable};
use super::HarnessError;
use crate::model::SampleRecord;

/// One model response to one manifest record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub sample_id: String,
    pub model: String,
    pub prompt_hash: String,
    /// `None` when every attempt failed.
    pub raw: Option<String>,
    pub parsed: ParsedAnswer,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ModelOutput {
    pub fn failed(&self) -> bool {
        self.raw.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    /// Line-delimited cache of successful outputs, read and appended.
    pub cache_path: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_in_flight: 4,
            retry: RetryPolicy::default(),
            cache_path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalSummary {
    pub total: usize,
    pub cached: usize,
    pub requested: usize,
    /// Records with no response after all retries; not counted as answers.
    pub failed: usize,
    pub unparseable: usize,
}

#[derive(Debug, Clone)]
pub struct EvalRun {
    /// One output per record, in manifest order.
    pub outputs: Vec<ModelOutput>,
    pub summary: EvalSummary,
}

type CacheKey = (String, String, String);

fn key(o: &ModelOutput) -> CacheKey {
    (o.model.clone(), o.sample_id.clone(), o.prompt_hash.clone())
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|e| HarnessError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(items)
}

/// Loads a cache file; a missing file is an empty cache.
pub fn load_cache(path: &Path) -> Result<HashMap<CacheKey, ModelOutput>, HarnessError> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    let entries: Vec<ModelOutput> = read_jsonl(path)?;
    Ok(entries.into_iter().map(|o| (key(&o), o)).collect())
}

pub fn read_outputs(path: &Path) -> Result<Vec<ModelOutput>, HarnessError> {
    read_jsonl(path)
}

pub fn write_outputs(outputs: &[ModelOutput], path: &Path) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for o in outputs {
        let line = serde_json::to_string(o).expect("outputs serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

struct Job<'a> {
    record: &'a SampleRecord,
    prompt: String,
    hash: String,
    image: Option<PathBuf>,
}

/// Queries `endpoint` once per record, reusing cached outputs.
///
/// Missing prompts or input files abort before any request. Endpoint
/// failures mark the record failed and the run continues.
pub fn run_eval(
    records: &[SampleRecord],
    manifest_dir: &Path,
    endpoint: &dyn Endpoint,
    parser: &AnswerParser,
    prompts: &PromptTable,
    opts: &EvalOptions,
) -> Result<EvalRun, HarnessError> {
    let model = endpoint.model_id().to_string();
    let mut jobs = Vec::with_capacity(records.len());
    for record in records {
        let prompt = prompts.render(record, manifest_dir)?;
        let image = match &record.image_path {
            Some(rel) => {
                let path = manifest_dir.join(rel);
                if !path.is_file() {
                    return Err(HarnessError::MissingInput {
                        id: record.id.clone(),
                        path,
                    });
                }
                Some(path)
            }
            None => None,
        };
        jobs.push(Job {
            record,
            hash: prompt_hash(&prompt),
            prompt,
            image,
        });
    }

    let cache = match &opts.cache_path {
        Some(p) => load_cache(p)?,
        None => HashMap::new(),
    };
    let slots: Vec<OnceLock<ModelOutput>> = jobs.iter().map(|_| OnceLock::new()).collect();
    let mut pending = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        match cache.get(&(model.clone(), job.record.id.clone(), job.hash.clone())) {
            Some(hit) => {
                let _ = slots[i].set(hit.clone());
            }
            None => pending.push(i),
        }
    }
    let mut summary = EvalSummary {
        total: records.len(),
        cached: records.len() - pending.len(),
        requested: pending.len(),
        ..EvalSummary::default()
    };

    let writer = match &opts.cache_path {
        Some(p) if !pending.is_empty() => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            let file = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|source| HarnessError::Io {
                    path: p.clone(),
                    source,
                })?;
            Some((p.clone(), file))
        }
        _ => None,
    };

    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.max(1).min(pending.len());
    let (tx, rx) = mpsc::channel::<ModelOutput>();
    let writer_result = std::thread::scope(|scope| {
        let writer_handle = writer.map(|(path, file)| {
            scope.spawn(move || -> Result<(), HarnessError> {
                let mut w = BufWriter::new(file);
                for output in rx {
                    let line = serde_json::to_string(&output).expect("outputs serialize");
                    writeln!(w, "{line}")
                        .and_then(|_| w.flush())
                        .map_err(|source| HarnessError::Io {
                            path: path.clone(),
                            source,
                        })?;
                }
                Ok(())
            })
        });
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, slots, pending, next, model) = (&jobs, &slots, &pending, &next, &model);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = pending.get(k) else { break };
                let output = query(&jobs[i], model, endpoint, parser, &opts.retry);
                if !output.failed() {
                    let _ = tx.send(output.clone());
                }
                let _ = slots[i].set(output);
            });
        }
        drop(tx);
        writer_handle.map_or(Ok(()), |h| h.join().expect("cache writer panicked"))
    });
    writer_result?;

    let outputs: Vec<ModelOutput> = slots
        .into_iter()
        .map(|s| s.into_inner().expect("every record answered"))
        .collect();
    summary.failed = outputs.iter().filter(|o| o.failed()).count();
    summary.unparseable = outputs
        .iter()
        .filter(|o| !o.failed() && o.parsed.is_unparseable())
        .count();
    Ok(EvalRun { outputs, summary })
}

fn query(
    job: &Job,
    model: &str,
    endpoint: &dyn Endpoint,
    parser: &AnswerParser,
    retry: &RetryPolicy,
) -> ModelOutput {
    let base = ModelOutput {
        sample_id: job.record.id.clone(),
        model: model.to_string(),
        prompt_hash: job.hash.clone(),
        raw: None,
        parsed: ParsedAnswer::Unparseable,
        latency_ms: 0,
        attempts: 0,
        error: None,
    };
    let image_png = match &job.image {
        Some(path) => match std::fs::read(path) {
            Ok(bytes) => Some(bytes),
            Err(e) => {
                return ModelOutput {
                    error: Some(format!("{}: {e}", path.display())),
                    ..base
                }
            }
        },
        None => None,
    };
    let request = Request {
        prompt: job.prompt.clone(),
        image_png,
    };
    let start = Instant::now();
    let (result, attempts) = complete_with_retry(endpoint, &request, retry);
    let latency_ms = start.elapsed().as_millis() as u64;
    match result {
        Ok(raw) => ModelOutput {
            parsed: parser.parse(job.record.task, &job.record.prompt_id, &raw),
            raw: Some(raw),
            latency_ms,
            attempts,
            ..base
        },
        Err(e) => {
            log::warn!("{}: {e}", job.record.id);
            ModelOutput {
                latency_ms,
                attempts,
                error: Some(e.to_string()),
                ..base
            }
        }
    }
}
