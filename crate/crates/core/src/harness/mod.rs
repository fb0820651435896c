//! Endpoint harness: prompts each manifest record, parses the answers and
//! caches the responses.

mod answer;
mod endpoint;
mod prompt;
mod run;

use std::path::PathBuf;

pub use answer::{
    canonical_answer, is_correct, AnswerParser, ParsedAnswer, ParsedPoint, SynonymError,
    DEFAULT_SYNONYMS,
};
pub use endpoint::{
    complete_with_retry, request_body, response_text, Endpoint, EndpointConfig,
    EndpointConfigError, EndpointError, HttpEndpoint, Request, RetryPolicy,
};
pub use prompt::{prompt_hash, PromptTable};
pub use run::{
    load_cache, read_outputs, run_eval, write_outputs, EvalOptions, EvalRun, EvalSummary,
    ModelOutput,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("record `{id}`: input {path} not found")]
    MissingInput { id: String, path: PathBuf },
    #[error("no prompt template `{0}`")]
    UnknownPrompt(String),
    #[error("prompt table: {0}")]
    Prompts(String),
}
