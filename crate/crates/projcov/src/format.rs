//! Text formats for models and data sets.
//!
//! The model format is line-oriented. Blank lines and lines starting with
//! `#` are skipped; every other line is one directive:
//!
//! ```text
//! combine: product
//! category weather: Sunny, Cloudy, Rainy
//! weights weather: 1, 1, 2
//! constraint: total_lanes != 1 | current_lane != 2
//! ```
//!
//! `combine` is optional (default `product`), `weights` defaults to all ones,
//! and a `constraint` is a `|`-separated disjunction of `name = value` /
//! `name != value` literals; multiple `constraint` lines conjoin. Categories
//! must be declared before anything refers to them. Names and value labels
//! are drawn from `[A-Za-z0-9_.+-]`.
//!
//! Data sets are comma-separated text: a header row holding every category
//! name (any order), then one row of value labels per data point. Repeated
//! rows raise the point's multiplicity. Both formats accept LF or CRLF and
//! are always written with LF.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    CategorizationModel, CategorizationPoint, Category, Clause, CombineOp, ConstraintSet, DataSet,
    Literal, LiteralOp,
};

/// A parse or semantic error, positioned at a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '+' | '-'))
}

/// Split a comma list while tracking the 1-based column of each item.
fn split_list(rest: &str, rest_col: usize) -> Vec<(String, usize)> {
    let mut items = Vec::new();
    let mut offset = 0usize;
    for piece in rest.split(',') {
        let leading = piece.len() - piece.trim_start().len();
        items.push((piece.trim().to_string(), rest_col + offset + leading));
        offset += piece.len() + 1;
    }
    items
}

struct PendingCategory {
    name: String,
    values: Vec<String>,
    weights: Option<Vec<u64>>,
}

/// Parse a model document. Every failure is a positioned [`ParseError`];
/// nothing partial is ever returned.
pub fn parse_model(text: &str) -> Result<CategorizationModel, ParseError> {
    let mut combine: Option<CombineOp> = None;
    let mut cats: Vec<PendingCategory> = Vec::new();
    let mut clauses: Vec<Clause> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(colon) = line.find(':') else {
            return Err(ParseError::new(
                lineno,
                1,
                "expected `<directive>: <content>`",
            ));
        };
        let head = line[..colon].trim();
        let rest = &line[colon + 1..];
        let rest_col = colon + 2;
        let mut head_parts = head.split_whitespace();
        let keyword = head_parts.next().unwrap_or("");
        let argument = head_parts.next();
        if head_parts.next().is_some() {
            return Err(ParseError::new(
                lineno,
                1,
                format!("malformed directive `{head}`"),
            ));
        }

        match (keyword, argument) {
            ("combine", None) => {
                if combine.is_some() {
                    return Err(ParseError::new(lineno, 1, "duplicate `combine` directive"));
                }
                let op = rest.trim();
                combine = Some(match op {
                    "sum" => CombineOp::Sum,
                    "product" => CombineOp::Product,
                    "max" => CombineOp::Max,
                    other => return Err(ParseError::new(
                        lineno,
                        rest_col,
                        format!(
                            "unknown combine operator `{other}` (expected sum, product, or max)"
                        ),
                    )),
                });
            }
            ("category", Some(name)) => {
                if !is_ident(name) {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("invalid category name `{name}`"),
                    ));
                }
                if cats.iter().any(|c| c.name == name) {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("duplicate category `{name}`"),
                    ));
                }
                let mut values = Vec::new();
                for (label, col) in split_list(rest, rest_col) {
                    if !is_ident(&label) {
                        return Err(ParseError::new(
                            lineno,
                            col,
                            format!("invalid value label `{label}`"),
                        ));
                    }
                    if values.contains(&label) {
                        return Err(ParseError::new(
                            lineno,
                            col,
                            format!("category `{name}` repeats value `{label}`"),
                        ));
                    }
                    values.push(label);
                }
                cats.push(PendingCategory {
                    name: name.to_string(),
                    values,
                    weights: None,
                });
            }
            ("weights", Some(name)) => {
                let Some(cat) = cats.iter_mut().find(|c| c.name == name) else {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("weights for undeclared category `{name}`"),
                    ));
                };
                if cat.weights.is_some() {
                    return Err(ParseError::new(
                        lineno,
                        1,
                        format!("duplicate weights for category `{name}`"),
                    ));
                }
                let mut weights = Vec::new();
                for (item, col) in split_list(rest, rest_col) {
                    let w: u64 = item.parse().map_err(|_| {
                        ParseError::new(lineno, col, format!("invalid weight `{item}`"))
                    })?;
                    weights.push(w);
                }
                if weights.len() != cat.values.len() {
                    return Err(ParseError::new(
                        lineno,
                        rest_col,
                        format!(
                            "category `{name}` has {} values but {} weights",
                            cat.values.len(),
                            weights.len()
                        ),
                    ));
                }
                cat.weights = Some(weights);
            }
            ("constraint", None) => {
                let mut literals = Vec::new();
                let mut offset = 0usize;
                for piece in rest.split('|') {
                    let col = rest_col + offset + (piece.len() - piece.trim_start().len());
                    offset += piece.len() + 1;
                    let lit = piece.trim();
                    if lit.is_empty() {
                        return Err(ParseError::new(lineno, col, "empty literal in constraint"));
                    }
                    let (name, op, label) = if let Some(pos) = lit.find("!=") {
                        (lit[..pos].trim(), LiteralOp::Neq, lit[pos + 2..].trim())
                    } else if let Some(pos) = lit.find('=') {
                        (lit[..pos].trim(), LiteralOp::Eq, lit[pos + 1..].trim())
                    } else {
                        return Err(ParseError::new(
                            lineno,
                            col,
                            format!("literal `{lit}` needs `=` or `!=`"),
                        ));
                    };
                    let Some(cat_idx) = cats.iter().position(|c| c.name == name) else {
                        return Err(ParseError::new(
                            lineno,
                            col,
                            format!("constraint references undeclared category `{name}`"),
                        ));
                    };
                    let Some(value) = cats[cat_idx].values.iter().position(|v| v == label) else {
                        return Err(ParseError::new(
                            lineno,
                            col,
                            format!("category `{name}` has no value `{label}`"),
                        ));
                    };
                    literals.push(Literal {
                        category: cat_idx,
                        op,
                        value,
                    });
                }
                clauses.push(Clause(literals));
            }
            _ => {
                return Err(ParseError::new(
                    lineno,
                    1,
                    format!("unknown directive `{head}`"),
                ));
            }
        }
    }

    let categories: Vec<Category> = cats
        .into_iter()
        .map(|c| {
            let weights = c.weights.unwrap_or_else(|| vec![1; c.values.len()]);
            Category {
                name: c.name,
                values: c.values,
                weights,
            }
        })
        .collect();
    CategorizationModel::new(
        categories,
        combine.unwrap_or(CombineOp::Product),
        ConstraintSet { clauses },
    )
    .map_err(|e| ParseError::new(text.lines().count().max(1), 1, e.to_string()))
}

/// Canonical text form; parsing it reproduces the model exactly.
pub fn serialize_model(model: &CategorizationModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "combine: {}", model.combine_op());
    for cat in model.categories() {
        let _ = writeln!(out, "category {}: {}", cat.name, cat.values.join(", "));
        if cat.weights.iter().any(|&w| w != 1) {
            let weights: Vec<String> = cat.weights.iter().map(|w| w.to_string()).collect();
            let _ = writeln!(out, "weights {}: {}", cat.name, weights.join(", "));
        }
    }
    for clause in &model.constraints().clauses {
        let _ = writeln!(
            out,
            "constraint: {}",
            crate::model::render_clause(model, clause)
        );
    }
    out
}

/// What to do with data rows that violate the constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnViolation {
    /// Fail parsing at the first violating row.
    #[default]
    Reject,
    /// Skip violating rows, recording why.
    Drop,
}

/// A row skipped under [`OnViolation::Drop`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRow {
    pub line: usize,
    pub reason: String,
}

/// A parsed data set plus its ingestion record.
#[derive(Debug, Clone)]
pub struct DatasetParse {
    pub dataset: DataSet,
    /// Accepted points in file order (duplicates preserved).
    pub rows: Vec<CategorizationPoint>,
    pub accepted: u64,
    pub dropped: Vec<DroppedRow>,
}

/// Parse a data set document against its model. The header may permute the
/// category order; rows are normalised to model order.
pub fn parse_dataset(
    text: &str,
    model: &CategorizationModel,
    policy: OnViolation,
) -> Result<DatasetParse, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let Some((header_line, header)) = lines.next() else {
        return Err(ParseError::new(1, 1, "missing header row"));
    };
    // column -> category index
    let mut column_map: Vec<usize> = Vec::new();
    let mut seen = vec![false; model.len()];
    for (name, col) in split_list(header, 1) {
        let Some(idx) = model.category_index(&name) else {
            return Err(ParseError::new(
                header_line,
                col,
                format!("header names unknown category `{name}`"),
            ));
        };
        if seen[idx] {
            return Err(ParseError::new(
                header_line,
                col,
                format!("header repeats category `{name}`"),
            ));
        }
        seen[idx] = true;
        column_map.push(idx);
    }
    if column_map.len() != model.len() {
        let missing: Vec<&str> = model
            .categories()
            .iter()
            .enumerate()
            .filter(|&(i, _)| !seen[i])
            .map(|(_, c)| c.name.as_str())
            .collect();
        return Err(ParseError::new(
            header_line,
            1,
            format!("header is missing categories: {}", missing.join(", ")),
        ));
    }

    let mut parse = DatasetParse {
        dataset: DataSet::new(),
        rows: Vec::new(),
        accepted: 0,
        dropped: Vec::new(),
    };
    for (lineno, line) in lines {
        let cells = split_list(line, 1);
        if cells.len() != model.len() {
            return Err(ParseError::new(
                lineno,
                1,
                format!("expected {} columns, found {}", model.len(), cells.len()),
            ));
        }
        let mut values = vec![0usize; model.len()];
        for ((label, col), &cat_idx) in cells.iter().zip(&column_map) {
            let cat = model.category(cat_idx);
            let Some(value) = cat.value_index(label) else {
                return Err(ParseError::new(
                    lineno,
                    *col,
                    format!("category `{}` has no value `{label}`", cat.name),
                ));
            };
            values[cat_idx] = value;
        }
        let point = CategorizationPoint(values);
        match parse.dataset.insert(model, point.clone(), 1) {
            Ok(()) => {
                parse.rows.push(point);
                parse.accepted += 1;
            }
            Err(violation) => match policy {
                OnViolation::Reject => {
                    return Err(ParseError::new(lineno, 1, violation.to_string()));
                }
                OnViolation::Drop => {
                    parse.dropped.push(DroppedRow {
                        line: lineno,
                        reason: violation.to_string(),
                    });
                }
            },
        }
    }
    Ok(parse)
}

/// Write points in the data set document format, header in model order, one
/// row per point in the given order.
pub fn write_points(model: &CategorizationModel, points: &[CategorizationPoint]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = model.categories().iter().map(|c| c.name.as_str()).collect();
    let _ = writeln!(out, "{}", names.join(","));
    for point in points {
        let labels: Vec<&str> = point
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| model.category(i).values[v].as_str())
            .collect();
        let _ = writeln!(out, "{}", labels.join(","));
    }
    out
}

/// Expand a data set into one row per point copy, in lexicographic point
/// order (multiset order is not tracked by [`DataSet`]).
pub fn dataset_rows(dataset: &DataSet) -> Vec<CategorizationPoint> {
    let mut rows = Vec::new();
    for (point, mult) in dataset.iter() {
        for _ in 0..mult {
            rows.push(point.clone());
        }
    }
    rows
}

/// Multiplicity map, for comparing data sets in tests and tools.
pub fn dataset_multiset(dataset: &DataSet) -> BTreeMap<CategorizationPoint, u64> {
    dataset.iter().map(|(p, m)| (p.clone(), m)).collect()
}
