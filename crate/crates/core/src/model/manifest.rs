use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{RecordError, SampleRecord};

/// Optional first line of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    /// Format version marker; its presence identifies the header line.
    pub v2r_manifest: u32,
    pub canvas: [u32; 2],
    pub seed: u64,
    pub tool_version: String,
    /// SHA-256 of the serialized run configuration.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub header: Option<ManifestHeader>,
    pub records: Vec<SampleRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate id `{id}`")]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("{path}:{line}: {source}")]
    Invalid {
        path: PathBuf,
        line: usize,
        source: RecordError,
    },
    #[error("duplicate id `{0}` in records to write")]
    DuplicateOnWrite(String),
    #[error(transparent)]
    InvalidOnWrite(#[from] RecordError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ManifestError + '_ {
    move |source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn check_records(records: &[SampleRecord]) -> Result<(), ManifestError> {
    let mut seen = HashSet::new();
    for r in records {
        r.validate()?;
        if !seen.insert(r.id.as_str()) {
            return Err(ManifestError::DuplicateOnWrite(r.id.clone()));
        }
    }
    Ok(())
}

/// Writes one JSON object per line, field order fixed by the record type.
pub fn write_manifest(records: &[SampleRecord], path: &Path) -> Result<(), ManifestError> {
    write_impl(None, records, path)
}

pub fn write_manifest_with_header(
    header: &ManifestHeader,
    records: &[SampleRecord],
    path: &Path,
) -> Result<(), ManifestError> {
    write_impl(Some(header), records, path)
}

fn write_impl(
    header: Option<&ManifestHeader>,
    records: &[SampleRecord],
    path: &Path,
) -> Result<(), ManifestError> {
    check_records(records)?;
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    if let Some(h) = header {
        let line = serde_json::to_string(h).expect("header serializes");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    for r in records {
        let line = serde_json::to_string(r).expect("record serializes");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>, ManifestError> {
    Ok(read_manifest_full(path)?.records)
}

pub fn read_manifest_full(path: &Path) -> Result<Manifest, ManifestError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut manifest = Manifest::default();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        if line_no == 1 && line.contains("\"v2r_manifest\"") {
            let header = serde_json::from_str(&line).map_err(|e| ManifestError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
            manifest.header = Some(header);
            continue;
        }
        let record: SampleRecord =
            serde_json::from_str(&line).map_err(|e| ManifestError::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        record.validate().map_err(|source| ManifestError::Invalid {
            path: path.to_path_buf(),
            line: line_no,
            source,
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(ManifestError::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: record.id,
            });
        }
        manifest.records.push(record);
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Anchor, Direction, GroundTruth, Point, Task, Variation};
    use proptest::prelude::*;
    use sha2::{Digest, Sha256};

    fn direction_record(id: &str) -> SampleRecord {
        SampleRecord {
            id: id.into(),
            task: Task::Direction,
            image_path: Some(format!("images/{id}.png")),
            variation: Some(Variation {
                position: Anchor { x: 67.2, y: 336.0 },
                scale: 1.0 / 3.0,
                rotation: 45.0,
                context: "white".into(),
            }),
            ground_truth: GroundTruth::Direction(Direction::TopRight),
            prompt_id: "direction".into(),
            seed: 42,
            source: Some("arrow".into()),
            params: None,
        }
    }

    #[test]
    fn empty_round_trip_is_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_manifest(&[], &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap().len(), 0);
        assert!(read_manifest(&path).unwrap().is_empty());
    }

    #[test]
    fn three_records_three_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let recs: Vec<_> = ["a", "b", "c"].iter().map(|i| direction_record(i)).collect();
        write_manifest(&recs, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 3);
        assert_eq!(read_manifest(&path).unwrap(), recs);
    }

    #[test]
    fn two_serializations_hash_identically() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<_> = ["a", "b"].iter().map(|i| direction_record(i)).collect();
        let p1 = dir.path().join("1.jsonl");
        let p2 = dir.path().join("2.jsonl");
        write_manifest(&recs, &p1).unwrap();
        write_manifest(&recs, &p2).unwrap();
        let h = |p: &Path| Sha256::digest(std::fs::read(p).unwrap());
        assert_eq!(h(&p1), h(&p2));
    }

    #[test]
    fn header_is_optional_first_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let header = ManifestHeader {
            v2r_manifest: 1,
            canvas: [672, 672],
            seed: 7,
            tool_version: "0.1.0".into(),
            config_hash: "abc".into(),
        };
        let recs = vec![direction_record("a")];
        write_manifest_with_header(&header, &recs, &path).unwrap();
        let m = read_manifest_full(&path).unwrap();
        assert_eq!(m.header, Some(header));
        assert_eq!(m.records, recs);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let good = serde_json::to_string(&direction_record("a")).unwrap();
        std::fs::write(&path, format!("{good}\n{{not json\n")).unwrap();
        match read_manifest(&path) {
            Err(ManifestError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_rejected_on_read_and_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        let recs = vec![direction_record("a"), direction_record("a")];
        assert!(matches!(
            write_manifest(&recs, &path),
            Err(ManifestError::DuplicateOnWrite(_))
        ));
        let line = serde_json::to_string(&recs[0]).unwrap();
        std::fs::write(&path, format!("{line}\n{line}\n")).unwrap();
        assert!(matches!(
            read_manifest(&path),
            Err(ManifestError::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn mismatched_ground_truth_rejected() {
        let mut r = direction_record("a");
        r.ground_truth = GroundTruth::Coordinate(Point::new2(1, 2));
        let dir = tempfile::tempdir().unwrap();
        assert!(write_manifest(&[r], &dir.path().join("m.jsonl")).is_err());
    }

    fn arb_record() -> impl Strategy<Value = SampleRecord> {
        (
            0usize..7,
            -1000.0f64..1000.0,
            -1000.0f64..1000.0,
            0.001f64..1.0,
            0.0f64..359.9,
            any::<u64>(),
            proptest::collection::vec((-20i64..20, -20i64..20), 1..7),
            "[a-z ]{1,12}",
        )
            .prop_map(|(kind, x, y, s, r, seed, pts, word)| {
                let points: Vec<Point> = pts.iter().map(|(a, b)| Point::new2(*a, *b)).collect();
                let (task, gt) = match kind {
                    0 => (Task::Object, GroundTruth::Category(word.clone())),
                    1 => (
                        Task::Direction,
                        GroundTruth::Direction(Direction::CLOCKWISE[(seed % 8) as usize]),
                    ),
                    2 => (Task::Coordinate, GroundTruth::Coordinate(points[0].clone())),
                    3 => (Task::Path, GroundTruth::Path(points.clone())),
                    4 => (
                        Task::TextMatrix,
                        GroundTruth::TextMatrix {
                            word: word.clone(),
                            row: (seed % 8) as usize,
                            col: 0,
                            count: 1,
                        },
                    ),
                    5 => (
                        Task::Ocr,
                        GroundTruth::Ocr {
                            source_text: word.clone(),
                            replacements: vec![crate::model::Replacement {
                                index: 0,
                                original: 'a',
                                replacement: 'é',
                            }],
                        },
                    ),
                    _ => (Task::ExtendedBenchmark, GroundTruth::Text(word.clone())),
                };
                SampleRecord {
                    id: format!("{task}-{seed}"),
                    task,
                    image_path: (task != Task::TextMatrix).then(|| format!("img/{seed}.png")),
                    variation: (seed % 2 == 0).then(|| Variation {
                        position: Anchor { x: x.abs(), y: y.abs() },
                        scale: s,
                        rotation: r,
                        context: "solid/12ab34".into(),
                    }),
                    ground_truth: gt,
                    prompt_id: task.to_string(),
                    seed,
                    source: None,
                    params: None,
                }
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(recs in proptest::collection::vec(arb_record(), 0..12)) {
            let mut unique = Vec::new();
            let mut seen = HashSet::new();
            for r in recs {
                if seen.insert(r.id.clone()) {
                    unique.push(r);
                }
            }
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.jsonl");
            write_manifest(&unique, &path).unwrap();
            prop_assert_eq!(read_manifest(&path).unwrap(), unique);
        }
    }
}
