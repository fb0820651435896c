use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::model::{
    rng_from_seed, GroundTruth, SampleRecord, Task, TaskParams, TextBackground, TEXT_MATRIX_SIZES,
};

/// Filler vocabulary for the random-words background; none contains a target word.
pub const BACKGROUND_WORDS: [&str; 20] = [
    "tree", "house", "river", "stone", "cloud", "lamp", "book", "chair", "road", "bread", "glass",
    "paper", "shoe", "rock", "hill", "door", "window", "table", "field", "rain",
];

const MAX_ROW_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextMatrixSpec {
    pub size: usize,
    pub word: String,
    pub background: TextBackground,
    pub row: usize,
    pub col: usize,
}

impl TextMatrixSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !TEXT_MATRIX_SIZES.contains(&self.size) {
            return Err(SynthError::InvalidSpec(format!("matrix size {} unsupported", self.size)));
        }
        if self.word.is_empty() || !self.word.chars().all(|c| c.is_ascii_lowercase()) {
            return Err(SynthError::InvalidSpec(format!(
                "target `{}` must be a lowercase ASCII word",
                self.word
            )));
        }
        let len = self.word.chars().count();
        if self.row >= self.size || self.col + len > self.size {
            return Err(SynthError::DoesNotFit(format!(
                "`{}` at ({}, {}) in a {}x{} matrix",
                self.word, self.row, self.col, self.size, self.size
            )));
        }
        Ok(())
    }

    /// Placement uniform over every feasible `(row, col)`.
    pub fn sample<R: Rng>(size: usize, word: &str, background: TextBackground, rng: &mut R) -> Self {
        let len = word.chars().count();
        TextMatrixSpec {
            size,
            word: word.to_string(),
            background,
            row: rng.gen_range(0..size),
            col: rng.gen_range(0..=size.saturating_sub(len)),
        }
    }
}

/// Left-to-right occurrences of `word` in one row.
fn row_occurrences(row: &[char], word: &[char]) -> usize {
    if word.is_empty() || row.len() < word.len() {
        return 0;
    }
    row.windows(word.len()).filter(|w| *w == word).count()
}

/// Total left-to-right occurrences of `word` over all rows.
pub fn count_occurrences(grid: &[Vec<char>], word: &str) -> usize {
    let word: Vec<char> = word.chars().collect();
    grid.iter().map(|row| row_occurrences(row, &word)).sum()
}

/// Parses a space-separated, newline-delimited matrix.
pub fn parse_matrix(text: &str) -> Vec<Vec<char>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(' ').filter_map(|c| c.chars().next()).collect())
        .collect()
}

pub fn format_matrix(grid: &[Vec<char>]) -> String {
    grid.iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            cells.join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn random_word_row<R: Rng>(size: usize, rng: &mut R) -> Vec<char> {
    let mut row = Vec::with_capacity(size + 8);
    while row.len() < size {
        row.extend(BACKGROUND_WORDS.choose(rng).unwrap().chars());
    }
    row.truncate(size);
    row
}

/// Builds the matrix and its record; ground truth carries the word, its
/// `(row, col)` and the occurrence count, which is always 1.
pub fn gen_text_matrix(
    spec: &TextMatrixSpec,
    seed: u64,
    id: &str,
) -> Result<(String, SampleRecord), SynthError> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let word: Vec<char> = spec.word.chars().collect();
    let mut grid = Vec::with_capacity(spec.size);
    for r in 0..spec.size {
        let wanted = usize::from(r == spec.row);
        let mut attempt = 0;
        let row = loop {
            let mut row = match spec.background {
                TextBackground::Asterisks => vec!['*'; spec.size],
                TextBackground::RandomWords => random_word_row(spec.size, &mut rng),
            };
            if r == spec.row {
                row[spec.col..spec.col + word.len()].copy_from_slice(&word);
            }
            if row_occurrences(&row, &word) == wanted {
                break row;
            }
            attempt += 1;
            if attempt >= MAX_ROW_ATTEMPTS {
                return Err(SynthError::InvalidSpec(format!(
                    "could not fill row {r} without repeating `{}`",
                    spec.word
                )));
            }
        };
        grid.push(row);
    }
    let count = count_occurrences(&grid, &spec.word);
    debug_assert_eq!(count, 1);

    let record = SampleRecord {
        id: id.to_string(),
        task: Task::TextMatrix,
        image_path: None,
        variation: None,
        ground_truth: GroundTruth::TextMatrix {
            word: spec.word.clone(),
            row: spec.row,
            col: spec.col,
            count,
        },
        prompt_id: "text-word".into(),
        seed,
        source: Some(id.to_string()),
        params: Some(TaskParams::TextMatrix {
            size: spec.size,
            background: spec.background,
        }),
    };
    Ok((format_matrix(&grid), record))
}
