//! Minimal LaTeX `tabular` reader.
//!
//! Only the structure needed to recover a cell grid is understood: row and
//! column separators, rule commands, `\multicolumn` and `\multirow`. Anything
//! else inside a cell is kept verbatim.

use serde::{Deserialize, Serialize};

/// One `tabular` block as a rectangular grid of cell texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTable {
    /// The paper whose source contained the table.
    pub paper_id: String,
    pub cells: Vec<Vec<String>>,
    pub caption: Option<String>,
}

impl RawTable {
    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TabularParse {
    pub tables: Vec<RawTable>,
    pub warnings: Vec<ParseWarning>,
}

const TABULAR_ENVS: &[&str] = &["tabular", "tabular*", "tabularx"];
const RULE_COMMANDS: &[&str] = &[
    "hline",
    "toprule",
    "midrule",
    "bottomrule",
    "addlinespace",
    "hdashline",
    "endhead",
    "endfirsthead",
];
const RULE_COMMANDS_WITH_ARG: &[&str] = &["cline", "cmidrule", "rowcolor", "arrayrulecolor"];

/// Extracts every top-level `tabular` block of `latex_source`, in document
/// order. Malformed blocks are skipped with a warning; this never fails.
pub fn parse_tabular(latex_source: &str, reporter: &str) -> TabularParse {
    let source = strip_comments(latex_source);
    let mut out = TabularParse::default();
    let mut pos = 0;

    while let Some((begin_start, env, after_begin)) = find_env_token(&source, pos, "begin") {
        let Some(body_start) = skip_tabular_args(&source, after_begin, env) else {
            out.warnings.push(ParseWarning {
                line: line_of(&source, begin_start),
                message: format!("unterminated argument after \\begin{{{env}}}"),
            });
            pos = after_begin;
            continue;
        };
        let Some((body_end, after_end)) = find_matching_end(&source, body_start) else {
            out.warnings.push(ParseWarning {
                line: line_of(&source, begin_start),
                message: format!("\\begin{{{env}}} has no matching \\end"),
            });
            pos = after_begin;
            continue;
        };

        let cells = split_body(&source[body_start..body_end]);
        if cells.is_empty() {
            out.warnings.push(ParseWarning {
                line: line_of(&source, begin_start),
                message: "tabular block has no non-empty rows".to_string(),
            });
        } else {
            out.tables.push(RawTable {
                paper_id: reporter.to_string(),
                cells,
                caption: enclosing_caption(&source, begin_start, after_end),
            });
        }
        pos = after_end;
    }
    out
}

/// Removes `%` comments, keeping escaped `\%` and line structure.
pub(crate) fn strip_comments(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    for (i, line) in src.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let bytes = line.as_bytes();
        let mut cut = line.len();
        let mut backslashes = 0usize;
        for (j, &b) in bytes.iter().enumerate() {
            if b == b'%' && backslashes.is_multiple_of(2) {
                cut = j;
                break;
            }
            backslashes = if b == b'\\' { backslashes + 1 } else { 0 };
        }
        out.push_str(&line[..cut]);
    }
    out
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Finds the next `\begin{<tabular env>}` (or `\end{...}`) at or after
/// `from`. Returns (token start, env name, offset after the token).
fn find_env_token<'a>(src: &'a str, from: usize, kind: &str) -> Option<(usize, &'a str, usize)> {
    let needle = format!("\\{kind}{{");
    let mut pos = from;
    while let Some(rel) = src[pos..].find(&needle) {
        let start = pos + rel;
        let name_start = start + needle.len();
        let close = src[name_start..].find('}')?;
        let name = &src[name_start..name_start + close];
        let after = name_start + close + 1;
        if TABULAR_ENVS.contains(&name) {
            return Some((start, name, after));
        }
        pos = after;
    }
    None
}

fn skip_tabular_args(src: &str, mut pos: usize, env: &str) -> Option<usize> {
    pos = skip_ws(src, pos);
    if src[pos..].starts_with('[') {
        pos += src[pos..].find(']')? + 1;
        pos = skip_ws(src, pos);
    }
    if env != "tabular" {
        let (_, end) = read_group(src, pos)?;
        pos = skip_ws(src, end);
    }
    let (_, end) = read_group(src, pos)?;
    Some(end)
}

fn skip_ws(src: &str, pos: usize) -> usize {
    pos + src[pos..].len() - src[pos..].trim_start().len()
}

/// Reads a balanced `{...}` group starting at `pos` (after optional
/// whitespace). Returns the inner text and the offset after the closing brace.
pub(crate) fn read_group(src: &str, pos: usize) -> Option<(&str, usize)> {
    let pos = skip_ws(src, pos);
    if !src[pos..].starts_with('{') {
        return None;
    }
    let mut depth = 0usize;
    let mut escaped = false;
    for (i, c) in src[pos..].char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' => escaped = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&src[pos + 1..pos + i], pos + i + 1));
                }
            }
            _ => {}
        }
    }
    None
}

/// Finds the `\end{tabular...}` closing the block whose body starts at
/// `from`, honoring nested tabular blocks.
fn find_matching_end(src: &str, from: usize) -> Option<(usize, usize)> {
    let mut depth = 1usize;
    let mut pos = from;
    loop {
        let next_begin = find_env_token(src, pos, "begin");
        let next_end = find_env_token(src, pos, "end")?;
        match next_begin {
            Some((b, _, after)) if b < next_end.0 => {
                depth += 1;
                pos = after;
            }
            _ => {
                depth -= 1;
                if depth == 0 {
                    return Some((next_end.0, next_end.2));
                }
                pos = next_end.2;
            }
        }
    }
}

/// Splits a tabular body into rows and cells at nesting depth zero.
fn split_body(body: &str) -> Vec<Vec<String>> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut row: Vec<String> = Vec::new();
    let mut cell = String::new();
    let mut brace_depth = 0usize;
    let mut env_depth = 0usize;
    let mut i = 0;

    while i < body.len() {
        let rest = &body[i..];
        let at_top = brace_depth == 0 && env_depth == 0;
        if rest.starts_with("\\begin{") {
            env_depth += 1;
            cell.push_str("\\begin{");
            i += "\\begin{".len();
            continue;
        }
        if rest.starts_with("\\end{") {
            env_depth = env_depth.saturating_sub(1);
            cell.push_str("\\end{");
            i += "\\end{".len();
            continue;
        }
        if at_top && (rest.starts_with("\\\\") || rest.starts_with("\\tabularnewline")) {
            i += if rest.starts_with("\\\\") {
                2
            } else {
                "\\tabularnewline".len()
            };
            if body[i..].starts_with('*') {
                i += 1;
            }
            let after = skip_ws(body, i);
            if body[after..].starts_with('[') {
                if let Some(close) = body[after..].find(']') {
                    i = after + close + 1;
                }
            }
            row.push(std::mem::take(&mut cell));
            rows.push(std::mem::take(&mut row));
            continue;
        }
        let c = rest.chars().next().unwrap_or_default();
        match c {
            '\\' => {
                // Escaped character or control word: copy both bytes so that
                // `\&`, `\{` and `\}` never act as structure.
                let next_len = rest[1..].chars().next().map_or(0, char::len_utf8);
                cell.push_str(&rest[..1 + next_len]);
                i += 1 + next_len;
                continue;
            }
            '{' => brace_depth += 1,
            '}' => brace_depth = brace_depth.saturating_sub(1),
            '&' if at_top => {
                row.push(std::mem::take(&mut cell));
                i += 1;
                continue;
            }
            _ => {}
        }
        cell.push(c);
        i += c.len_utf8();
    }
    row.push(cell);
    rows.push(row);

    let mut grid: Vec<Vec<String>> = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .flat_map(|c| expand_cell(&strip_rules(&c)))
                .collect::<Vec<_>>()
        })
        .filter(|row: &Vec<String>| row.iter().any(|c| !c.is_empty()))
        .collect();

    let width = grid.iter().map(Vec::len).max().unwrap_or(0);
    for row in &mut grid {
        row.resize(width, String::new());
    }
    grid
}

/// Removes horizontal-rule commands from a cell.
fn strip_rules(cell: &str) -> String {
    let mut out = String::with_capacity(cell.len());
    let mut i = 0;
    'outer: while i < cell.len() {
        let rest = &cell[i..];
        if let Some(after_slash) = rest.strip_prefix('\\') {
            let name_len = after_slash
                .bytes()
                .take_while(|b| b.is_ascii_alphabetic())
                .count();
            let name = &after_slash[..name_len];
            if RULE_COMMANDS.contains(&name) {
                i += 1 + name_len;
                continue 'outer;
            }
            if RULE_COMMANDS_WITH_ARG.contains(&name) {
                let mut j = i + 1 + name_len;
                // optional (trim) and [opt] arguments
                loop {
                    let k = skip_ws(cell, j);
                    let open = cell[k..].chars().next();
                    let close = match open {
                        Some('(') => ')',
                        Some('[') => ']',
                        _ => break,
                    };
                    match cell[k..].find(close) {
                        Some(c) => j = k + c + 1,
                        None => break,
                    }
                }
                if let Some((_, end)) = read_group(cell, j) {
                    j = end;
                }
                i = j;
                continue 'outer;
            }
        }
        let c = rest.chars().next().unwrap_or_default();
        out.push(c);
        i += c.len_utf8();
    }
    out
}

/// Expands `\multicolumn{n}{spec}{content}` into n cells and unwraps
/// `\multirow{n}[..]{width}{content}`.
fn expand_cell(cell: &str) -> Vec<String> {
    let trimmed = cell.trim();
    if let Some(rest) = trimmed.strip_prefix("\\multicolumn") {
        if let Some((n, a)) = read_group(rest, 0) {
            if let Some((_, b)) = read_group(rest, a) {
                if let Some((content, c)) = read_group(rest, b) {
                    let span = n.trim().parse::<usize>().unwrap_or(1).max(1);
                    let mut first = expand_cell(content).into_iter().next().unwrap_or_default();
                    let tail = rest[c..].trim();
                    if !tail.is_empty() {
                        first = format!("{first} {tail}").trim().to_string();
                    }
                    let mut cells = vec![first];
                    cells.resize(span, String::new());
                    return cells;
                }
            }
        }
    }
    if let Some(rest) = trimmed.strip_prefix("\\multirow") {
        let mut pos = skip_ws(rest, 0);
        if let Some((_, a)) = read_group(rest, pos) {
            pos = skip_ws(rest, a);
            if rest[pos..].starts_with('[') {
                if let Some(close) = rest[pos..].find(']') {
                    pos += close + 1;
                }
            }
            if let Some((_, b)) = read_group(rest, pos) {
                if let Some((content, c)) = read_group(rest, b) {
                    let tail = rest[c..].trim();
                    return vec![format!("{} {}", content.trim(), tail).trim().to_string()];
                }
            }
        }
    }
    vec![trimmed.to_string()]
}

/// Caption of the `table` float that encloses the block, if any.
fn enclosing_caption(src: &str, block_start: usize, block_end: usize) -> Option<String> {
    let float_start = src[..block_start].rfind("\\begin{table")?;
    if src[float_start..block_start].contains("\\end{table") {
        return None;
    }
    let float_end = block_end + src[block_end..].find("\\end{table")?;
    let region = &src[float_start..float_end];
    let at = region.find("\\caption")?;
    let mut pos = at + "\\caption".len();
    if region[pos..].trim_start().starts_with('[') {
        pos = skip_ws(region, pos);
        pos += region[pos..].find(']')? + 1;
    }
    let (caption, _) = read_group(region, pos)?;
    let caption = caption.split_whitespace().collect::<Vec<_>>().join(" ");
    Some(caption)
}
