//! Table extraction: LaTeX `tabular` blocks to pairwise comparison records.

mod extract;
mod latex;
mod metric;
mod records;

pub use extract::{
    detect_orientation, extract_comparisons, first_cite_key, parse_numeric_cell, Orientation,
};
pub use latex::{parse_tabular, ParseWarning, RawTable, TabularParse};
pub use metric::{normalize_metric, MetricRegistry, MetricSpec, Polarity, UNKNOWN_METRIC};
pub use records::{load_records, parse_records, records_to_string, save_records, ComparisonRecord};

/// Result of extracting every table in one document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentExtraction {
    pub tables: usize,
    pub records: Vec<ComparisonRecord>,
    pub warnings: Vec<ParseWarning>,
}

/// Parses all tables of a LaTeX source and extracts their comparisons.
pub fn extract_document(
    latex_source: &str,
    reporter: &str,
    registry: &MetricRegistry,
) -> DocumentExtraction {
    let parsed = parse_tabular(latex_source, reporter);
    let records = parsed
        .tables
        .iter()
        .flat_map(|t| extract_comparisons(t, registry))
        .collect();
    DocumentExtraction {
        tables: parsed.tables.len(),
        records,
        warnings: parsed.warnings,
    }
}
