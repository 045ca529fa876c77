use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::jsonl::{self, Line};

/// One pairwise comparison read off a table: `paper_lo` reported the
/// smaller raw value, `paper_hi` the larger, both under `metric`, in a table
/// of paper `reporter`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub metric: String,
    pub paper_lo: String,
    pub value_lo: f64,
    pub paper_hi: String,
    pub value_hi: f64,
    pub reporter: String,
}

impl ComparisonRecord {
    fn from_line(line: &Line) -> Result<Self> {
        Ok(ComparisonRecord {
            metric: line.str("metric")?,
            paper_lo: line.str("paper_lo")?,
            value_lo: line.f64("value_lo")?,
            paper_hi: line.str("paper_hi")?,
            value_hi: line.f64("value_hi")?,
            reporter: line.str("reporter")?,
        })
    }
}

pub fn parse_records(text: &str) -> Result<Vec<ComparisonRecord>> {
    jsonl::parse_lines(text)?
        .iter()
        .map(ComparisonRecord::from_line)
        .collect()
}

pub fn records_to_string(records: &[ComparisonRecord]) -> String {
    jsonl::to_string(records)
}

pub fn load_records(path: &Path) -> Result<Vec<ComparisonRecord>> {
    jsonl::read_lines(path)?
        .iter()
        .map(ComparisonRecord::from_line)
        .collect()
}

pub fn save_records(records: &[ComparisonRecord], path: &Path) -> Result<()> {
    jsonl::write_text(path, &records_to_string(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    const WELL_FORMED: &str = concat!(
        r#"{"metric":"f1","paper_lo":"X","value_lo":0.5,"paper_hi":"Y","value_hi":0.6,"reporter":"P"}"#,
        "\n",
        r#"{"metric":"time","paper_lo":"A","value_lo":-3.0,"paper_hi":"B","value_hi":12.0,"reporter":"Q"}"#,
        "\n",
    );

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = std::env::temp_dir().join(format!("perfgraph-records-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.jsonl");
        std::fs::write(&path, WELL_FORMED).unwrap();
        let records = load_records(&path).unwrap();
        assert_eq!(records.len(), 2);
        let out = dir.join("out.jsonl");
        save_records(&records, &out).unwrap();
        assert_eq!(std::fs::read_to_string(&out).unwrap(), WELL_FORMED);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn empty_input_is_empty_list() {
        assert!(parse_records("").unwrap().is_empty());
        assert!(parse_records("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn missing_field_names_line_and_field() {
        let text =
            r#"{"paper_lo":"X","value_lo":0.5,"paper_hi":"Y","value_hi":0.6,"reporter":"P"}"#;
        match parse_records(text) {
            Err(Error::MissingField {
                line: 1,
                field: "metric",
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_names_line() {
        let text = format!("{}{}", WELL_FORMED, "{not json\n");
        match parse_records(&text) {
            Err(Error::MalformedLine { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_records(
            r#"{"metric":"f1","paper_lo":"X","value_lo":"high","paper_hi":"Y","value_hi":0.6,"reporter":"P"}"#,
        ) {
            Err(Error::InvalidField {
                line: 1,
                field: "value_lo",
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn save_then_parse_is_identity(
            recs in proptest::collection::vec(
                ("[a-z ]{1,8}", "[A-Za-z0-9.]{1,6}", -1e6f64..1e6, "[A-Za-z0-9.]{1,6}", -1e6f64..1e6, "[a-z\"\\\\]{1,6}"),
                0..10,
            )
        ) {
            let records: Vec<ComparisonRecord> = recs
                .into_iter()
                .map(|(metric, paper_lo, value_lo, paper_hi, value_hi, reporter)| ComparisonRecord {
                    metric, paper_lo, value_lo, paper_hi, value_hi, reporter,
                })
                .collect();
            let text = records_to_string(&records);
            prop_assert_eq!(parse_records(&text).unwrap(), records);
        }
    }
}
