//! Reading integer-coded play sequences from text and from a directory of
//! per-subject CSV files.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ActionAlphabet, PlaySequence};

/// Plays per subject in the reference human rock-paper-scissors data.
pub const REFERENCE_LENGTH: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectRecord {
    /// File stem.
    pub subject_id: String,
    pub sequence: PlaySequence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadFailure {
    pub subject_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    /// Sorted by `subject_id`.
    pub records: Vec<SubjectRecord>,
    pub failures: Vec<LoadFailure>,
    pub warnings: Vec<String>,
}

/// Parses comma- and/or newline-separated integer tokens in `[0, k)`.
/// Empty fields are skipped; positions in errors are 1-based over the
/// non-empty tokens.
pub fn parse_sequence_file(content: &str, alphabet: &ActionAlphabet) -> Result<PlaySequence> {
    let k = alphabet.len();
    let tokens = content
        .split([',', '\n', '\r'])
        .map(str::trim)
        .filter(|t| !t.is_empty());
    let mut items = Vec::new();
    for (i, token) in tokens.enumerate() {
        let position = i + 1;
        let value: i64 = token.parse().map_err(|_| Error::NotAnInteger {
            position,
            token: token.to_string(),
        })?;
        if value < 0 || value >= k as i64 {
            return Err(Error::ValueOutOfRange { position, value });
        }
        items.push(value as usize);
    }
    PlaySequence::new(alphabet.clone(), items)
}

/// Loads every `*.csv` file in `dir`. Per-file problems are collected in
/// [`Dataset::failures`] and do not stop the load.
pub fn load_dataset(dir: &Path, alphabet: &ActionAlphabet) -> Result<Dataset> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_csv = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
        if is_csv && path.is_file() {
            paths.push(path);
        }
    }

    let mut dataset = Dataset::default();
    for path in paths {
        let subject_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let parsed = fs::read_to_string(&path)
            .map_err(|e| Error::io(&path, e))
            .and_then(|content| parse_sequence_file(&content, alphabet));
        match parsed {
            Ok(sequence) => {
                if sequence.len() != REFERENCE_LENGTH {
                    dataset.warnings.push(format!(
                        "{subject_id}: {} plays (expected {REFERENCE_LENGTH})",
                        sequence.len()
                    ));
                }
                dataset.records.push(SubjectRecord {
                    subject_id,
                    sequence,
                });
            }
            Err(err) => dataset.failures.push(LoadFailure {
                subject_id,
                message: err.to_string(),
            }),
        }
    }
    dataset
        .records
        .sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    dataset
        .failures
        .sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    dataset.warnings.sort();
    if dataset.records.is_empty() && dataset.failures.is_empty() {
        dataset
            .warnings
            .push(format!("no .csv files found in {}", dir.display()));
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k3() -> ActionAlphabet {
        ActionAlphabet::indexed(3).unwrap()
    }

    #[test]
    fn comma_separated() {
        let seq = parse_sequence_file("0,1,2,0", &k3()).unwrap();
        assert_eq!(seq.items(), &[0, 1, 2, 0]);
    }

    #[test]
    fn newline_separated_and_trailing_fields() {
        assert_eq!(
            parse_sequence_file("0\n1\n2", &k3()).unwrap().items(),
            &[0, 1, 2]
        );
        assert_eq!(
            parse_sequence_file(" 0 , 1,\r\n2,\n\n", &k3())
                .unwrap()
                .items(),
            &[0, 1, 2]
        );
        assert!(parse_sequence_file("", &k3()).unwrap().is_empty());
    }

    #[test]
    fn out_of_range() {
        let err = parse_sequence_file("0,3,1", &k3()).unwrap_err();
        assert_eq!(
            err,
            Error::ValueOutOfRange {
                position: 2,
                value: 3
            }
        );
        assert_eq!(err.to_string(), "value 3 out of range at position 2");
        assert!(matches!(
            parse_sequence_file("0,-1", &k3()),
            Err(Error::ValueOutOfRange {
                position: 2,
                value: -1
            })
        ));
    }

    #[test]
    fn not_an_integer() {
        let err = parse_sequence_file("0,1\nx,2", &k3()).unwrap_err();
        assert_eq!(
            err,
            Error::NotAnInteger {
                position: 3,
                token: "x".into()
            }
        );
    }

    #[test]
    fn missing_directory() {
        let err = load_dataset(Path::new("/nonexistent/strattest"), &k3()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    proptest! {
        #[test]
        fn round_trip(items in prop::collection::vec(0usize..3, 0..120)) {
            let seq = PlaySequence::new(k3(), items).unwrap();
            let line = seq.to_csv_line();
            prop_assert_eq!(parse_sequence_file(&line, &k3()).unwrap(), seq.clone());
            let column = line.replace(',', "\n");
            prop_assert_eq!(parse_sequence_file(&column, &k3()).unwrap(), seq);
        }
    }
}
