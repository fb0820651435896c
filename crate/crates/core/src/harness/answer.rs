use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::{Direction, GroundTruth, Point, SampleRecord, Task, DEFAULT_CLASSES, TEXT_MATRIX_WORDS};

pub const DEFAULT_SYNONYMS: &str = include_str!("../../data/synonyms.toml");

const NUMBER: &str = r"-?\d+(?:\.\d+)?";

static TUPLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"\(\s*({NUMBER}(?:\s*,\s*{NUMBER})*)\s*,?\s*\)")).unwrap()
});
static BRACKET: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\[\]]*)\]").unwrap());
static INTEGER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-?\d+").unwrap());

/// A parsed numeric tuple; compares equal to a [`Point`] with the same components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParsedPoint(pub Vec<f64>);

impl PartialEq<Point> for ParsedPoint {
    fn eq(&self, other: &Point) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| *a == *b as f64)
    }
}

impl From<&Point> for ParsedPoint {
    fn from(p: &Point) -> Self {
        ParsedPoint(p.0.iter().map(|c| *c as f64).collect())
    }
}

impl fmt::Display for ParsedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        match parts.len() {
            1 => write!(f, "({},)", parts[0]),
            _ => write!(f, "({})", parts.join(", ")),
        }
    }
}

/// Task-typed answer extracted from a raw model response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ParsedAnswer {
    Unparseable,
    Category(String),
    Direction(Direction),
    Coordinate(ParsedPoint),
    Path(Vec<ParsedPoint>),
    Word(String),
    Position(ParsedPoint),
    Count(u64),
    Text(String),
}

impl ParsedAnswer {
    pub fn is_unparseable(&self) -> bool {
        matches!(self, ParsedAnswer::Unparseable)
    }

    /// Whether this answer has the shape expected for `task` / `prompt_id`.
    pub fn fits(&self, task: Task, prompt_id: &str) -> bool {
        use ParsedAnswer as A;
        match (self, task) {
            (A::Unparseable, _) => true,
            (A::Category(_), Task::Object)
            | (A::Direction(_), Task::Direction)
            | (A::Coordinate(_), Task::Coordinate)
            | (A::Path(_), Task::Path)
            | (A::Text(_), Task::Ocr | Task::ExtendedBenchmark) => true,
            (A::Word(_), Task::TextMatrix) => prompt_id == "text-word",
            (A::Position(_), Task::TextMatrix) => prompt_id == "text-position",
            (A::Count(_), Task::TextMatrix) => prompt_id == "text-count",
            _ => false,
        }
    }
}

#[derive(Debug, Deserialize)]
struct SynonymFile {
    #[serde(default)]
    direction: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    category: BTreeMap<String, Vec<String>>,
}

/// Lowercase words with punctuation dropped; hyphens and underscores split words.
fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '-' || c == '_' || c == '/')
        .map(|w| w.chars().filter(|c| c.is_alphanumeric()).collect::<String>())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Phrase table matched by earliest position, then longest phrase.
#[derive(Debug, Clone)]
struct PhraseTable<T> {
    phrases: Vec<(Vec<String>, T)>,
}

impl<T: Clone> PhraseTable<T> {
    fn new() -> Self {
        PhraseTable { phrases: Vec::new() }
    }

    fn add(&mut self, phrase: &str, value: T) {
        let w = words(phrase);
        if !w.is_empty() {
            self.phrases.push((w, value));
        }
    }

    fn find(&self, text: &str) -> Option<T> {
        let tokens = words(text);
        for start in 0..tokens.len() {
            let best = self
                .phrases
                .iter()
                .filter(|(p, _)| tokens[start..].starts_with(p))
                .max_by_key(|(p, _)| p.len());
            if let Some((_, v)) = best {
                return Some(v.clone());
            }
        }
        None
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SynonymError {
    #[error("synonym table: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("synonym table: unknown direction `{0}`")]
    UnknownDirection(String),
}

/// Turns raw responses into [`ParsedAnswer`]s. Parsing is total: anything
/// that cannot be read as the task's answer type is `Unparseable`.
#[derive(Debug, Clone)]
pub struct AnswerParser {
    directions: PhraseTable<Direction>,
    categories: PhraseTable<String>,
    words: PhraseTable<String>,
}

impl Default for AnswerParser {
    fn default() -> Self {
        let classes: Vec<String> = DEFAULT_CLASSES.iter().map(|s| s.to_string()).collect();
        let words: Vec<String> = TEXT_MATRIX_WORDS.iter().map(|s| s.to_string()).collect();
        Self::new(&classes, &words, DEFAULT_SYNONYMS).expect("bundled synonym table is valid")
    }
}

impl AnswerParser {
    /// `classes` are the object categories, `words` the text-matrix targets;
    /// `synonyms` is a TOML table in the bundled format.
    pub fn new(classes: &[String], words: &[String], synonyms: &str) -> Result<Self, SynonymError> {
        let file: SynonymFile = toml::from_str(synonyms)?;
        let mut directions = PhraseTable::new();
        for d in Direction::CLOCKWISE {
            directions.add(d.as_str(), d);
        }
        for (name, phrases) in &file.direction {
            let d: Direction = name.parse().map_err(|_| SynonymError::UnknownDirection(name.clone()))?;
            for p in phrases {
                directions.add(p, d);
            }
        }
        let mut categories = PhraseTable::new();
        for class in classes {
            categories.add(class, class.clone());
            for alias in file.category.get(class).into_iter().flatten() {
                categories.add(alias, class.clone());
            }
        }
        let mut targets = PhraseTable::new();
        for w in words {
            targets.add(w, w.clone());
        }
        Ok(AnswerParser {
            directions,
            categories,
            words: targets,
        })
    }

    pub fn parse(&self, task: Task, prompt_id: &str, raw: &str) -> ParsedAnswer {
        let parsed = match task {
            Task::Object => self.categories.find(raw).map(ParsedAnswer::Category),
            Task::Direction => self.directions.find(raw).map(ParsedAnswer::Direction),
            Task::Coordinate => first_tuple(raw).map(ParsedAnswer::Coordinate),
            Task::Path => parse_path(raw).map(ParsedAnswer::Path),
            Task::TextMatrix => match prompt_id {
                "text-word" => self.words.find(raw).map(ParsedAnswer::Word),
                "text-position" => first_tuple(raw)
                    .filter(|p| p.0.len() == 2)
                    .map(ParsedAnswer::Position),
                "text-count" => INTEGER
                    .find(raw)
                    .and_then(|m| m.as_str().parse().ok())
                    .map(ParsedAnswer::Count),
                _ => None,
            },
            Task::Ocr | Task::ExtendedBenchmark => {
                let t = raw.trim();
                (!t.is_empty()).then(|| ParsedAnswer::Text(t.to_string()))
            }
        };
        parsed.unwrap_or(ParsedAnswer::Unparseable)
    }
}

fn tuple_from(caps: &regex::Captures) -> Option<ParsedPoint> {
    caps[1]
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok())
        .collect::<Option<Vec<_>>>()
        .map(ParsedPoint)
}

fn first_tuple(text: &str) -> Option<ParsedPoint> {
    TUPLE.captures_iter(text).find_map(|c| tuple_from(&c))
}

fn all_tuples(text: &str) -> Vec<ParsedPoint> {
    TUPLE.captures_iter(text).filter_map(|c| tuple_from(&c)).collect()
}

/// First bracketed list holding at least one tuple; otherwise every tuple in the text.
fn parse_path(text: &str) -> Option<Vec<ParsedPoint>> {
    let listed = BRACKET
        .captures_iter(text)
        .map(|c| all_tuples(&c[1]))
        .find(|ps| !ps.is_empty());
    let points = listed.unwrap_or_else(|| all_tuples(text));
    (!points.is_empty()).then_some(points)
}

/// The answer a perfect model would give, as text.
pub fn canonical_answer(record: &SampleRecord) -> String {
    match (&record.ground_truth, record.prompt_id.as_str()) {
        (GroundTruth::TextMatrix { row, col, .. }, "text-position") => format!("({row}, {col})"),
        (GroundTruth::TextMatrix { count, .. }, "text-count") => count.to_string(),
        (gt, _) => gt.canonical(),
    }
}

fn normalize_text(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Correctness of a parsed answer; unparseable answers are always wrong.
pub fn is_correct(record: &SampleRecord, answer: &ParsedAnswer) -> bool {
    use ParsedAnswer as A;
    match (&record.ground_truth, answer) {
        (_, A::Unparseable) => false,
        (GroundTruth::Category(c), A::Category(a)) => c.eq_ignore_ascii_case(a),
        (GroundTruth::Direction(d), A::Direction(a)) => d == a,
        (GroundTruth::Coordinate(p), A::Coordinate(a)) => a == p,
        (GroundTruth::Path(ps), A::Path(a)) => a.len() == ps.len() && a.iter().zip(ps).all(|(x, y)| x == y),
        (GroundTruth::TextMatrix { word, .. }, A::Word(a)) => word == a,
        (GroundTruth::TextMatrix { row, col, .. }, A::Position(a)) => {
            *a == Point::new2(*row as i64, *col as i64)
        }
        (GroundTruth::TextMatrix { count, .. }, A::Count(a)) => *count as u64 == *a,
        (gt @ GroundTruth::Ocr { .. }, A::Text(a)) => normalize_text(&gt.canonical()) == normalize_text(a),
        (GroundTruth::Text(t), A::Text(a)) => {
            let (t, a) = (words(t).join(" "), words(a).join(" "));
            !t.is_empty() && (a == t || format!(" {a} ").contains(&format!(" {t} ")))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> AnswerParser {
        AnswerParser::default()
    }

    #[test]
    fn direction_synonyms() {
        let p = p();
        assert_eq!(
            p.parse(Task::Direction, "direction", "The arrow points to the upper-right."),
            ParsedAnswer::Direction(Direction::TopRight)
        );
        assert_eq!(
            p.parse(Task::Direction, "direction", "Bottom left"),
            ParsedAnswer::Direction(Direction::BottomLeft)
        );
        assert_eq!(
            p.parse(Task::Direction, "direction", "It points LEFT!"),
            ParsedAnswer::Direction(Direction::Left)
        );
    }

    #[test]
    fn refusal_is_unparseable() {
        assert!(p()
            .parse(Task::Direction, "direction", "Sorry, I don't see the arrow in the image.")
            .is_unparseable());
        assert!(p().parse(Task::Coordinate, "coordinate", "I cannot tell.").is_unparseable());
        assert!(p().parse(Task::Object, "object", "").is_unparseable());
    }

    #[test]
    fn tuples_and_paths() {
        let p = p();
        assert_eq!(
            p.parse(Task::Coordinate, "coordinate", "(3, 7)"),
            ParsedAnswer::Coordinate(ParsedPoint(vec![3.0, 7.0]))
        );
        assert_eq!(
            p.parse(Task::Coordinate, "coordinate", "The point is at (-4,)."),
            ParsedAnswer::Coordinate(ParsedPoint(vec![-4.0]))
        );
        assert_eq!(
            p.parse(Task::Path, "path", "Start (9, 9). Path: [(1, 2), (3, 4)]"),
            ParsedAnswer::Path(vec![ParsedPoint(vec![1.0, 2.0]), ParsedPoint(vec![3.0, 4.0])])
        );
        assert_eq!(
            p.parse(Task::Path, "path", "(1, 2) then (3, 4)"),
            ParsedAnswer::Path(vec![ParsedPoint(vec![1.0, 2.0]), ParsedPoint(vec![3.0, 4.0])])
        );
    }

    #[test]
    fn categories_by_substring_and_alias() {
        let p = p();
        assert_eq!(
            p.parse(Task::Object, "object", "This is a Shiba Dog sitting."),
            ParsedAnswer::Category("shiba dog".into())
        );
        assert_eq!(
            p.parse(Task::Object, "object", "An airplane in the sky"),
            ParsedAnswer::Category("plane".into())
        );
        assert!(p.parse(Task::Object, "object", "a giraffe").is_unparseable());
    }

    #[test]
    fn text_questions() {
        let p = p();
        assert_eq!(p.parse(Task::TextMatrix, "text-word", "The word is ZEBRA."), ParsedAnswer::Word("zebra".into()));
        assert_eq!(
            p.parse(Task::TextMatrix, "text-position", "(2, 5)"),
            ParsedAnswer::Position(ParsedPoint(vec![2.0, 5.0]))
        );
        assert_eq!(p.parse(Task::TextMatrix, "text-count", "It appears 1 time."), ParsedAnswer::Count(1));
    }

    #[test]
    fn bad_synonym_table_rejected() {
        assert!(AnswerParser::new(&[], &[], "[direction]\nsideways = [\"x\"]").is_err());
        assert!(AnswerParser::new(&[], &[], "not toml [").is_err());
    }

    fn arb_record() -> impl Strategy<Value = SampleRecord> {
        use crate::model::Replacement;
        let point = prop::collection::vec(-20i64..=20, 1..=2).prop_map(Point);
        let point2 = (-20i64..=20, -20i64..=20).prop_map(|(x, y)| Point::new2(x, y));
        let gt = prop_oneof![
            (0..DEFAULT_CLASSES.len()).prop_map(|i| (Task::Object, "object", GroundTruth::Category(DEFAULT_CLASSES[i].into()))),
            (0usize..8).prop_map(|i| (Task::Direction, "direction", GroundTruth::Direction(Direction::CLOCKWISE[i]))),
            point.prop_map(|p| (Task::Coordinate, "coordinate", GroundTruth::Coordinate(p))),
            prop::collection::vec(point2, 2..=6).prop_map(|ps| (Task::Path, "path", GroundTruth::Path(ps))),
            (0..TEXT_MATRIX_WORDS.len(), 0usize..64, 0usize..64, 0usize..3).prop_map(|(w, row, col, q)| {
                let gt = GroundTruth::TextMatrix { word: TEXT_MATRIX_WORDS[w].into(), row, col, count: 1 };
                (Task::TextMatrix, ["text-word", "text-position", "text-count"][q], gt)
            }),
            ("[a-z]{3,8}( [a-z]{3,8}){0,5}").prop_map(|t| {
                let r = Replacement { index: 0, original: t.chars().next().unwrap(), replacement: '#' };
                (Task::Ocr, "ocr", GroundTruth::Ocr { source_text: t, replacements: vec![r] })
            }),
        ];
        gt.prop_map(|(task, prompt, gt)| SampleRecord {
            id: "x".into(),
            task,
            image_path: None,
            variation: None,
            ground_truth: gt,
            prompt_id: prompt.into(),
            seed: 0,
            source: None,
            params: None,
        })
    }

    proptest! {
        #[test]
        fn canonical_answers_parse_back(record in arb_record()) {
            let parser = AnswerParser::default();
            let parsed = parser.parse(record.task, &record.prompt_id, &canonical_answer(&record));
            prop_assert!(parsed.fits(record.task, &record.prompt_id));
            prop_assert!(is_correct(&record, &parsed), "{:?} -> {:?}", canonical_answer(&record), parsed);
        }

        #[test]
        fn parsing_is_total_and_deterministic(raw in ".{0,80}", t in 0usize..6) {
            let task = Task::ALL[t];
            let parser = AnswerParser::default();
            let a = parser.parse(task, task.as_str(), &raw);
            prop_assert_eq!(&a, &parser.parse(task, task.as_str(), &raw));
            prop_assert!(a.fits(task, task.as_str()));
        }
    }
}
