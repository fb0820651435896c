use std::sync::LazyLock;

use regex::Regex;

use crate::harness::{complete_with_retry, Endpoint, Request, RetryPolicy};

const DEFAULT_RUBRIC: &str = include_str!("../../data/judge_rubric.txt");

static FIRST_INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\d+").unwrap());

/// Grading prompt with `{reference}` and `{answer}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgeRubric {
    pub template: String,
}

impl Default for JudgeRubric {
    fn default() -> Self {
        JudgeRubric {
            template: DEFAULT_RUBRIC.to_string(),
        }
    }
}

impl JudgeRubric {
    /// Grading prompt for a group of outputs from variations of one sample.
    pub fn render(&self, reference: &str, outputs: &[&str]) -> String {
        let answer = match outputs {
            [one] => one.to_string(),
            many => many
                .iter()
                .enumerate()
                .map(|(i, o)| format!("{}. {}", i + 1, o.trim()))
                .collect::<Vec<_>>()
                .join("\n"),
        };
        self.template
            .replace("{reference}", reference)
            .replace("{answer}", &answer)
    }
}

/// First integer in the verdict, rescaled from 0-10 to [0, 1].
pub fn parse_judge_verdict(text: &str) -> Option<f64> {
    let n: u32 = FIRST_INTEGER.find(text)?.as_str().parse().ok()?;
    (n <= 10).then(|| n as f64 / 10.0)
}

/// Asks the judge endpoint to grade `outputs`; failures and unreadable
/// verdicts give `None` so aggregation drops the judge dimension.
pub fn llm_judge(
    outputs: &[&str],
    reference: &str,
    rubric: &JudgeRubric,
    endpoint: &dyn Endpoint,
    retry: &RetryPolicy,
) -> Option<f64> {
    let request = Request {
        prompt: rubric.render(reference, outputs),
        image_png: None,
    };
    match complete_with_retry(endpoint, &request, retry).0 {
        Ok(verdict) => {
            let score = parse_judge_verdict(&verdict);
            if score.is_none() {
                log::warn!("judge verdict without a 0-10 score: {verdict:?}");
            }
            score
        }
        Err(e) => {
            log::warn!("judge request failed: {e}");
            None
        }
    }
}
