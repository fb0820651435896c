use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::space::Variation;

/// Benchmark task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Object,
    Direction,
    Coordinate,
    Path,
    TextMatrix,
    Ocr,
    ExtendedBenchmark,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Object,
        Task::Direction,
        Task::Coordinate,
        Task::Path,
        Task::TextMatrix,
        Task::Ocr,
        Task::ExtendedBenchmark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Object => "object",
            Task::Direction => "direction",
            Task::Coordinate => "coordinate",
            Task::Path => "path",
            Task::TextMatrix => "text-matrix",
            Task::Ocr => "ocr",
            Task::ExtendedBenchmark => "extended-benchmark",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task `{s}`"))
    }
}

/// The eight arrow directions, listed clockwise starting from `up`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    TopRight,
    Right,
    BottomRight,
    Down,
    BottomLeft,
    Left,
    TopLeft,
}

impl Direction {
    /// Clockwise order; index `i` points at `45 * i` degrees clockwise from up.
    pub const CLOCKWISE: [Direction; 8] = [
        Direction::Up,
        Direction::TopRight,
        Direction::Right,
        Direction::BottomRight,
        Direction::Down,
        Direction::BottomLeft,
        Direction::Left,
        Direction::TopLeft,
    ];

    pub fn index(self) -> usize {
        Self::CLOCKWISE.iter().position(|d| *d == self).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::TopRight => "top-right",
            Direction::Right => "right",
            Direction::BottomRight => "bottom-right",
            Direction::Down => "down",
            Direction::BottomLeft => "bottom-left",
            Direction::Left => "left",
            Direction::TopLeft => "top-left",
        }
    }

    /// Unit pointing vector in image coordinates (y grows downwards).
    pub fn vector(self) -> (f64, f64) {
        let angle = (self.index() as f64 * 45.0).to_radians();
        (angle.sin(), -angle.cos())
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::CLOCKWISE
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown direction `{s}`"))
    }
}

/// Integer coordinate tuple, 1-D or 2-D.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new1(x: i64) -> Self {
        Point(vec![x])
    }

    pub fn new2(x: i64, y: i64) -> Self {
        Point(vec![x, y])
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Point {
    /// `(x,)` for one component, `(x, y)` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [x] => write!(f, "({x},)"),
            comps => {
                f.write_str("(")?;
                for (i, c) in comps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Formats a path as `[(x1, y1), (x2, y2), ...]`.
pub fn format_path(points: &[Point]) -> String {
    let inner: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

/// One of the four axis ranges used by the coordinate and path datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlotRange {
    pub lo: i64,
    pub hi: i64,
}

impl PlotRange {
    pub const STANDARD: [PlotRange; 4] = [
        PlotRange { lo: -5, hi: 5 },
        PlotRange { lo: -10, hi: 10 },
        PlotRange { lo: 0, hi: 10 },
        PlotRange { lo: 0, hi: 20 },
    ];

    pub fn contains(&self, v: i64) -> bool {
        (self.lo..=self.hi).contains(&v)
    }

    pub fn span(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn is_supported(&self) -> bool {
        Self::STANDARD.contains(self)
    }
}

impl fmt::Display for PlotRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// Gaussian blur levels for the corrupted-text task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlurLevel {
    B0,
    B1,
    B2,
    B3,
}

impl BlurLevel {
    pub const ALL: [BlurLevel; 4] = [BlurLevel::B0, BlurLevel::B1, BlurLevel::B2, BlurLevel::B3];

    /// Gaussian sigma in pixels at the fixed render scale.
    pub fn sigma(self) -> f32 {
        match self {
            BlurLevel::B0 => 0.0,
            BlurLevel::B1 => 1.0,
            BlurLevel::B2 => 2.0,
            BlurLevel::B3 => 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextBackground {
    Asterisks,
    RandomWords,
}

/// A single corrupted character: `text[index]` was `original`, now shows `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Replacement {
    pub index: usize,
    pub original: char,
    pub replacement: char,
}

/// Task-typed answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruth {
    Category(String),
    Direction(Direction),
    Coordinate(Point),
    Path(Vec<Point>),
    TextMatrix {
        word: String,
        row: usize,
        col: usize,
        count: usize,
    },
    Ocr {
        source_text: String,
        replacements: Vec<Replacement>,
    },
    Text(String),
}

impl GroundTruth {
    pub fn matches_task(&self, task: Task) -> bool {
        matches!(
            (self, task),
            (GroundTruth::Category(_), Task::Object)
                | (GroundTruth::Direction(_), Task::Direction)
                | (GroundTruth::Coordinate(_), Task::Coordinate)
                | (GroundTruth::Path(_), Task::Path)
                | (GroundTruth::TextMatrix { .. }, Task::TextMatrix)
                | (GroundTruth::Ocr { .. }, Task::Ocr)
                | (GroundTruth::Text(_), Task::ExtendedBenchmark)
        )
    }

    /// Canonical answer string, the form a perfect model would print.
    pub fn canonical(&self) -> String {
        match self {
            GroundTruth::Category(s) | GroundTruth::Text(s) => s.clone(),
            GroundTruth::Direction(d) => d.to_string(),
            GroundTruth::Coordinate(p) => p.to_string(),
            GroundTruth::Path(ps) => format_path(ps),
            GroundTruth::TextMatrix { word, .. } => word.clone(),
            GroundTruth::Ocr {
                source_text,
                replacements,
            } => apply_replacements(source_text, replacements),
        }
    }
}

/// Applies replacements to `text` (character indices).
pub(crate) fn apply_replacements(text: &str, replacements: &[Replacement]) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    for r in replacements {
        if let Some(c) = chars.get_mut(r.index) {
            *c = r.replacement;
        }
    }
    chars.into_iter().collect()
}

/// Generation parameters kept on the record for stratified reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskParams {
    Coordinate {
        dims: u8,
        range: PlotRange,
        grid: bool,
        reference_lines: bool,
    },
    Path {
        n: usize,
        range: PlotRange,
    },
    TextMatrix {
        size: usize,
        background: TextBackground,
    },
    Ocr {
        blur: BlurLevel,
    },
}

/// One manifest row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<Variation>,
    pub ground_truth: GroundTruth,
    pub prompt_id: String,
    pub seed: u64,
    /// Key of the original image or synthetic spec the record was derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<TaskParams>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RecordError {
    #[error("record `{id}`: ground truth does not match task `{task}`")]
    GroundTruthMismatch { id: String, task: Task },
    #[error("record `{0}`: empty id")]
    EmptyId(String),
    #[error("record `{id}`: {reason}")]
    Invalid { id: String, reason: String },
}

impl SampleRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.id.trim().is_empty() {
            return Err(RecordError::EmptyId(self.id.clone()));
        }
        if !self.ground_truth.matches_task(self.task) {
            return Err(RecordError::GroundTruthMismatch {
                id: self.id.clone(),
                task: self.task,
            });
        }
        let invalid = |reason: &str| RecordError::Invalid {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        match self.task {
            Task::TextMatrix => {
                if self.image_path.is_some() {
                    return Err(invalid("text-matrix records carry no image"));
                }
            }
            _ => {
                if self.image_path.is_none() {
                    return Err(invalid("missing image path"));
                }
            }
        }
        if let Some(v) = &self.variation {
            v.check_intrinsic().map_err(|e| invalid(&e))?;
        }
        Ok(())
    }
}
