use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::model::{SampleRecord, Task};
use crate::synth::text_rel_path;

const DEFAULT_PROMPTS: &str = include_str!("../../data/prompts.toml");

/// Prompt templates keyed by prompt id.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTable {
    templates: BTreeMap<String, String>,
}

impl Default for PromptTable {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_PROMPTS).expect("bundled prompt table is valid")
    }
}

impl PromptTable {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let templates: BTreeMap<String, String> =
            toml::from_str(s).map_err(|e| HarnessError::Prompts(e.to_string()))?;
        Ok(PromptTable { templates })
    }

    pub fn get(&self, prompt_id: &str) -> Option<&str> {
        self.templates.get(prompt_id).map(String::as_str)
    }

    /// Final prompt text for `record`; text-matrix bodies are read from the
    /// manifest directory.
    pub fn render(&self, record: &SampleRecord, manifest_dir: &Path) -> Result<String, HarnessError> {
        let template = self
            .get(&record.prompt_id)
            .ok_or_else(|| HarnessError::UnknownPrompt(record.prompt_id.clone()))?;
        if record.task != Task::TextMatrix {
            return Ok(template.to_string());
        }
        let source = record.source.as_deref().unwrap_or(&record.id);
        let path = manifest_dir.join(text_rel_path(source));
        let body = std::fs::read_to_string(&path).map_err(|_| HarnessError::MissingInput {
            id: record.id.clone(),
            path: path.clone(),
        })?;
        Ok(template.replace("{matrix}", body.trim_end()))
    }
}

/// Hex SHA-256 of the rendered prompt; part of the cache key.
pub fn prompt_hash(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
