use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::synth::OcrTaskSpec;

/// How a transcription treats the corrupted characters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrFidelity {
    /// Fraction of replacements transcribed as written.
    pub reported_as_written: f64,
    /// Fraction of replacements silently corrected back to the original.
    pub inferred_correction: f64,
}

/// Whitespace tokens as (start char index, chars), lowercased, with
/// surrounding punctuation trimmed unless it sits on a protected index.
fn tokens(text: &str, protected: &HashSet<usize>) -> Vec<(usize, Vec<char>)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut s, mut e) = (start, i);
        let trim = |k: usize| !chars[k].is_alphanumeric() && !protected.contains(&k);
        while s < e && trim(s) {
            s += 1;
        }
        while e > s && trim(e - 1) {
            e -= 1;
        }
        if s < e {
            out.push((s, chars[s..e].iter().flat_map(|c| c.to_lowercase()).collect()));
        }
    }
    out
}

/// Scores a transcription over the replacement positions only. A word of the
/// output counts as a version of a corrupted word when it agrees with it
/// everywhere except at replaced positions, where either the original or the
/// replacement character is accepted. Counts are compared against the
/// rendered text itself so that unaltered repeats of a word do not count as
/// corrections.
pub fn ocr_fidelity(raw: &str, spec: &OcrTaskSpec) -> OcrFidelity {
    if spec.replacements.is_empty() {
        return OcrFidelity {
            reported_as_written: 0.0,
            inferred_correction: 0.0,
        };
    }
    let lower = |c: char| c.to_lowercase().next().unwrap_or(c);
    let corrupted = spec.corrupted();
    let protected: HashSet<usize> = spec.replacements.iter().map(|r| r.index).collect();
    let text_tokens = tokens(&corrupted, &protected);
    let out_tokens = tokens(raw, &HashSet::new());
    let (mut kept, mut fixed) = (0usize, 0usize);
    for r in &spec.replacements {
        let Some((start, word)) = text_tokens
            .iter()
            .find(|(s, w)| (*s..*s + w.len()).contains(&r.index))
        else {
            continue;
        };
        let offset = r.index - start;
        // allowed characters per position of this word
        let allowed: Vec<Vec<char>> = (0..word.len())
            .map(|j| {
                let mut a = vec![word[j]];
                for q in &spec.replacements {
                    if q.index == start + j {
                        a.push(lower(q.original));
                    }
                }
                a
            })
            .collect();
        let fits = |w: &[char]| w.len() == allowed.len() && w.iter().zip(&allowed).all(|(c, a)| a.contains(c));
        let count = |toks: &[(usize, Vec<char>)], c: char| {
            toks.iter().filter(|(_, w)| fits(w) && w[offset] == c).count()
        };
        let (orig, repl) = (lower(r.original), lower(r.replacement));
        if count(&out_tokens, repl) >= count(&text_tokens, repl) {
            kept += 1;
        }
        if count(&out_tokens, orig) > count(&text_tokens, orig) {
            fixed += 1;
        }
    }
    let n = spec.replacements.len() as f64;
    OcrFidelity {
        reported_as_written: kept as f64 / n,
        inferred_correction: fixed as f64 / n,
    }
}
