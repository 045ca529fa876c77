use std::sync::OnceLock;

use regex::Regex;

use super::latex::RawTable;
use super::metric::MetricRegistry;
use super::records::ComparisonRecord;

fn cite_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\\[A-Za-z]*cite[A-Za-z]*\*?\s*(?:\[[^\]]*\]\s*)*\{([^}]*)\}").unwrap()
    })
}

fn number_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)$").unwrap())
}

/// First citation key in a cell. Multi-key cites resolve to their first key.
pub fn first_cite_key(cell: &str) -> Option<String> {
    cite_regex().captures_iter(cell).find_map(|caps| {
        caps[1]
            .split(',')
            .map(str::trim)
            .find(|k| !k.is_empty())
            .map(str::to_string)
    })
}

/// Parses a numeric table cell: optional sign, decimal digits, optional
/// trailing percent sign, optionally wrapped in `$...$`. The percent sign is
/// dropped without rescaling.
pub fn parse_numeric_cell(cell: &str) -> Option<f64> {
    let mut s = unwrap_math(cell.trim());
    for suffix in ["\\%", "%"] {
        if let Some(stripped) = s.strip_suffix(suffix) {
            s = unwrap_math(stripped.trim_end());
            break;
        }
    }
    if !number_regex().is_match(s) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn unwrap_math(s: &str) -> &str {
    let s = s.trim();
    match s.strip_prefix('$').and_then(|s| s.strip_suffix('$')) {
        Some(inner) => inner.trim(),
        None => s,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// One compared method per row, metrics in column headers.
    CitationsInRows,
    /// One compared method per column, metrics in row headers.
    CitationsInColumns,
}

/// Picks the axis along which cited methods are laid out: whichever has more
/// lines (rows or columns) containing a citation. Ties go to rows.
pub fn detect_orientation(table: &RawTable) -> Orientation {
    let has_cite = |cell: &String| cite_regex().is_match(cell);
    let cited_rows = table
        .cells
        .iter()
        .filter(|row| row.iter().any(has_cite))
        .count();
    let cited_cols = (0..table.cols())
        .filter(|&j| table.cells.iter().any(|row| has_cite(&row[j])))
        .count();
    if cited_cols > cited_rows {
        Orientation::CitationsInColumns
    } else {
        Orientation::CitationsInRows
    }
}

/// Emits one record per metric column and per unordered pair of cited rows
/// whose cells in that column are both numeric and differ.
pub fn extract_comparisons(table: &RawTable, registry: &MetricRegistry) -> Vec<ComparisonRecord> {
    let grid: Vec<Vec<String>> = match detect_orientation(table) {
        Orientation::CitationsInRows => table.cells.clone(),
        Orientation::CitationsInColumns => transpose(&table.cells),
    };
    let owners: Vec<Option<(String, usize)>> = grid
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .find_map(|(j, cell)| first_cite_key(cell).map(|k| (k, j)))
        })
        .collect();
    let Some(first_cited) = owners.iter().position(Option::is_some) else {
        return Vec::new();
    };
    let cols = grid.first().map_or(0, Vec::len);

    let mut records = Vec::new();
    for col in 0..cols {
        let entries: Vec<(&str, f64)> = grid
            .iter()
            .zip(&owners)
            .filter_map(|(row, owner)| {
                let (paper, cite_col) = owner.as_ref()?;
                if *cite_col == col {
                    return None;
                }
                parse_numeric_cell(&row[col]).map(|v| (paper.as_str(), v))
            })
            .collect();
        if entries.len() < 2 {
            continue;
        }
        let header = (0..first_cited)
            .rev()
            .map(|r| grid[r][col].trim())
            .find(|h| !h.is_empty())
            .unwrap_or("");
        let metric = registry.canonical(header);

        for (i, &(paper_a, value_a)) in entries.iter().enumerate() {
            for &(paper_b, value_b) in &entries[i + 1..] {
                if paper_a == paper_b || value_a == value_b {
                    continue;
                }
                let ((paper_lo, value_lo), (paper_hi, value_hi)) = if value_a < value_b {
                    ((paper_a, value_a), (paper_b, value_b))
                } else {
                    ((paper_b, value_b), (paper_a, value_a))
                };
                records.push(ComparisonRecord {
                    metric: metric.clone(),
                    paper_lo: paper_lo.to_string(),
                    value_lo,
                    paper_hi: paper_hi.to_string(),
                    value_hi,
                    reporter: table.paper_id.clone(),
                });
            }
        }
    }
    records
}

fn transpose(cells: &[Vec<String>]) -> Vec<Vec<String>> {
    let cols = cells.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| cells.iter().map(|row| row[j].clone()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_tabular;
    use proptest::prelude::*;

    fn table(rows: &[&[&str]]) -> RawTable {
        RawTable {
            paper_id: "P".into(),
            cells: rows
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect(),
            caption: None,
        }
    }

    #[test]
    fn numeric_cells() {
        assert_eq!(parse_numeric_cell("0.5"), Some(0.5));
        assert_eq!(parse_numeric_cell(" -3 "), Some(-3.0));
        assert_eq!(parse_numeric_cell("+2."), Some(2.0));
        assert_eq!(parse_numeric_cell(".25"), Some(0.25));
        assert_eq!(parse_numeric_cell("85.2\\%"), Some(85.2));
        assert_eq!(parse_numeric_cell("85.2%"), Some(85.2));
        assert_eq!(parse_numeric_cell("$71.3$"), Some(71.3));
        assert_eq!(parse_numeric_cell("$71.3\\%$"), Some(71.3));
        for bad in [
            "—",
            "-",
            "",
            "n/a",
            "\\textbf{80.1}",
            "1,000",
            "3e5",
            "12.3 (0.4)",
            ".",
        ] {
            assert_eq!(parse_numeric_cell(bad), None, "{bad}");
        }
    }

    #[test]
    fn cite_keys() {
        assert_eq!(first_cite_key(r"Ours \cite{a, b}").as_deref(), Some("a"));
        assert_eq!(first_cite_key(r"\citep[p.~3]{k1}").as_deref(), Some("k1"));
        assert_eq!(
            first_cite_key(r"\citet{x} and \cite{y}").as_deref(),
            Some("x")
        );
        assert_eq!(first_cite_key("no citation"), None);
        assert_eq!(first_cite_key(r"\cite{}"), None);
    }

    #[test]
    fn simple_pair() {
        let t = table(&[
            &["Method", "F1"],
            &[r"X \cite{X}", "0.50"],
            &[r"Y \cite{Y}", "0.60"],
        ]);
        let recs = extract_comparisons(&t, &MetricRegistry::default());
        assert_eq!(
            recs,
            vec![ComparisonRecord {
                metric: "f1".into(),
                paper_lo: "X".into(),
                value_lo: 0.50,
                paper_hi: "Y".into(),
                value_hi: 0.60,
                reporter: "P".into(),
            }]
        );
    }

    #[test]
    fn three_methods_two_metrics_yield_six_records() {
        let src = r"\begin{tabular}{lcc} Method & Z1 & Z2 \\
            A \cite{A} & 0.70 & 0.60 \\ B \cite{B} & 0.65 & 0.68 \\ C \cite{C} & 0.80 & 0.75 \end{tabular}";
        let t = &parse_tabular(src, "P").tables[0];
        let recs = extract_comparisons(t, &MetricRegistry::default());
        assert_eq!(recs.len(), 6);
        assert_eq!(recs.iter().filter(|r| r.metric == "z1").count(), 3);
        assert!(recs
            .iter()
            .all(|r| r.value_lo < r.value_hi && r.paper_lo != r.paper_hi));
    }

    #[test]
    fn transposed_table() {
        let t = table(&[
            &["", r"A \cite{A}", r"B \cite{B}", r"C \cite{C}"],
            &["BLEU", "20.1", "22.4", "—"],
        ]);
        assert_eq!(detect_orientation(&t), Orientation::CitationsInColumns);
        let recs = extract_comparisons(&t, &MetricRegistry::default());
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].metric, "bleu");
        assert_eq!(
            (recs[0].paper_lo.as_str(), recs[0].paper_hi.as_str()),
            ("A", "B")
        );
    }

    #[test]
    fn orientation_tie_prefers_rows() {
        let t = table(&[&[r"\cite{A}", "1"], &["x", "2"]]);
        assert_eq!(detect_orientation(&t), Orientation::CitationsInRows);
    }

    #[test]
    fn non_numeric_and_uncited_rows_are_ignored() {
        let t = table(&[
            &["Method", "Acc"],
            &[r"A \cite{A}", "—"],
            &[r"B \cite{B}", "—"],
            &["Ours", "99.0"],
        ]);
        assert!(extract_comparisons(&t, &MetricRegistry::default()).is_empty());
        let no_cites = table(&[&["Method", "Acc"], &["A", "1"], &["B", "2"]]);
        assert!(extract_comparisons(&no_cites, &MetricRegistry::default()).is_empty());
    }

    #[test]
    fn equal_values_and_same_owner_emit_nothing() {
        let t = table(&[
            &["Method", "Acc"],
            &[r"A \cite{A}", "1.0"],
            &[r"A-large \cite{A}", "2.0"],
            &[r"B \cite{B}", "1.0"],
        ]);
        let recs = extract_comparisons(&t, &MetricRegistry::default());
        // (A,A) skipped, (A 1.0, B 1.0) tie skipped, (A 2.0, B 1.0) kept
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].paper_lo, "B");
        assert_eq!(recs[0].value_hi, 2.0);
    }

    #[test]
    fn repeated_cite_in_row_uses_first_cell() {
        let t = table(&[
            &["Method", "Acc", "Note"],
            &[r"A \cite{A}", "1.0", r"see \cite{Z}"],
            &[r"B \cite{B}", "2.0", r"\cite{B}"],
        ]);
        let recs = extract_comparisons(&t, &MetricRegistry::default());
        assert_eq!(recs.len(), 1);
        assert_eq!(
            (recs[0].paper_lo.as_str(), recs[0].paper_hi.as_str()),
            ("A", "B")
        );
    }

    proptest! {
        #[test]
        fn record_count_is_pairs_per_column(
            values in proptest::collection::vec(
                proptest::collection::vec(proptest::option::of(0u32..1_000_000), 3),
                0..8,
            )
        ) {
            let mut rows = vec![vec!["Method".to_string(), "a".into(), "b".into(), "c".into()]];
            for (i, row) in values.iter().enumerate() {
                let mut cells = vec![format!(r"M{i} \cite{{p{i}}}")];
                // distinct values per column keep every pair comparable
                cells.extend(row.iter().enumerate().map(|(j, v)| match v {
                    Some(v) => format!("{}.{:03}", v, i * 3 + j),
                    None => "--".to_string(),
                }));
                rows.push(cells);
            }
            let t = RawTable { paper_id: "P".into(), cells: rows, caption: None };
            let recs = extract_comparisons(&t, &MetricRegistry::default());
            let mut expected = 0;
            for col in 0..3 {
                let c = values.iter().filter(|r| r[col].is_some()).count();
                expected += c * c.saturating_sub(1) / 2;
            }
            prop_assert_eq!(recs.len(), expected);
            for r in &recs {
                prop_assert!(r.value_lo <= r.value_hi);
                prop_assert!(r.paper_lo != r.paper_hi);
            }
        }
    }
}
