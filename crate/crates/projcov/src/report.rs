//! Report rendering: coverage summaries, per-plane tables, and generation
//! traces.
//!
//! Numbers are serialised as decimal strings so arbitrary-precision values
//! survive the trip through text and JSON unchanged; the only rounding
//! anywhere is the fixed six-decimal approximation printed next to the exact
//! ratio.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::coverage::{
    cell_weight, delta_cells, delta_space, project, Cell, CoverageError, CoverageResult,
    CoverageScope, FeasibilityCache, ProjectionIndex, ProjectionTables,
};
use crate::generate::{GenerationTrace, StopReason};
use crate::model::{CategorizationModel, CategorizationPoint};
use crate::sat::SpaceError;

/// Exact decimal rendering of `num / den` with `places` digits, rounded
/// half-up. A zero denominator renders as 1 (the vacuous convention).
pub fn decimal_string(num: &BigUint, den: &BigUint, places: u32) -> String {
    if den.is_zero() {
        return format!("1.{}", "0".repeat(places as usize));
    }
    let scale = BigUint::from(10u32).pow(places);
    let scaled = num * &scale;
    let mut quotient = &scaled / den;
    let remainder = &scaled % den;
    if &remainder * 2u32 >= *den {
        quotient += 1u32;
    }
    let int_part = &quotient / &scale;
    let frac_part = &quotient % &scale;
    format!(
        "{}.{:0>width$}",
        int_part,
        frac_part.to_string(),
        width = places as usize
    )
}

/// `a/b` reduced; integers render without the denominator.
pub fn reduced_string(result: &CoverageResult) -> String {
    let ratio = result.ratio();
    if ratio.denom() == &num_bigint::BigInt::from(1) {
        ratio.numer().to_string()
    } else {
        format!("{}/{}", ratio.numer(), ratio.denom())
    }
}

/// Value labels of a point, comma-joined in model order.
pub fn point_labels(model: &CategorizationModel, point: &CategorizationPoint) -> String {
    point
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| model.category(i).values[v].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

fn scope_line(scope: CoverageScope) -> String {
    match scope {
        CoverageScope::Full => "full space".to_string(),
        CoverageScope::Projection { k } => format!("{k}-projection"),
    }
}

/// Human-readable coverage report.
pub fn write_report(model: &CategorizationModel, result: &CoverageResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scope: {}", scope_line(result.scope));
    let _ = writeln!(out, "combine: {}", model.combine_op());
    let _ = writeln!(out, "numerator: {}", result.numerator);
    let _ = writeln!(out, "denominator: {}", result.denominator);
    let _ = writeln!(out, "coverage: {}/{}", result.numerator, result.denominator);
    let _ = writeln!(out, "reduced: {}", reduced_string(result));
    let _ = writeln!(
        out,
        "decimal: {}",
        decimal_string(&result.numerator, &result.denominator, 6)
    );
    if result.vacuous {
        let _ = writeln!(out, "vacuous: yes (denominator 0; coverage defined as 1)");
    }
    let _ = writeln!(out, "coverable cells: {}", result.coverable_cells);
    if !result.per_projection.is_empty() {
        let _ = writeln!(out, "projection planes: {}", result.per_projection.len());
        for share in &result.per_projection {
            let _ = writeln!(
                out,
                "  {}: {}/{}",
                share.delta.label(model),
                share.numerator,
                share.denominator
            );
        }
    }
    let _ = writeln!(out, "infeasible cells: {}", result.infeasible_cells.len());
    for (delta, cell) in &result.infeasible_cells {
        let _ = writeln!(out, "  {}", cell.label(model, delta));
    }
    let _ = writeln!(out, "zero-weight cells: {}", result.zero_weight_cells.len());
    for (delta, cell) in &result.zero_weight_cells {
        let _ = writeln!(out, "  {}", cell.label(model, delta));
    }
    if !result.cell_lists_complete {
        let _ = writeln!(
            out,
            "note: cell lists truncated (space above enumeration limit)"
        );
    }
    out
}

/// JSON coverage report; all big numbers are decimal strings.
pub fn report_json(model: &CategorizationModel, result: &CoverageResult) -> Value {
    let scope = match result.scope {
        CoverageScope::Full => json!({ "kind": "full" }),
        CoverageScope::Projection { k } => json!({ "kind": "projection", "k": k }),
    };
    json!({
        "scope": scope,
        "combine": model.combine_op().as_str(),
        "numerator": result.numerator.to_string(),
        "denominator": result.denominator.to_string(),
        "reduced": reduced_string(result),
        "decimal": decimal_string(&result.numerator, &result.denominator, 6),
        "vacuous": result.vacuous,
        "coverable_cells": result.coverable_cells.to_string(),
        "projections": result.per_projection.iter().map(|share| json!({
            "categories": share.delta.label(model),
            "numerator": share.numerator.to_string(),
            "denominator": share.denominator.to_string(),
        })).collect::<Vec<_>>(),
        "infeasible_cells": result.infeasible_cells.iter()
            .map(|(d, c)| c.label(model, d)).collect::<Vec<_>>(),
        "zero_weight_cells": result.zero_weight_cells.iter()
            .map(|(d, c)| c.label(model, d)).collect::<Vec<_>>(),
        "cell_lists_complete": result.cell_lists_complete,
    })
}

/// Cell marker in a projection table: the first data row that covered it,
/// `X` for constraint-infeasible cells, `w0` for weight-zero cells, `-` for
/// cells still waiting for data.
fn cell_marker(
    model: &CategorizationModel,
    delta: &ProjectionIndex,
    cell: &Cell,
    first_cover: &BTreeMap<Cell, usize>,
    cache: &mut FeasibilityCache,
) -> String {
    if cell_weight(model, delta, cell).is_zero() {
        return "w0".to_string();
    }
    if !cache.is_feasible(model, delta, cell) {
        return "X".to_string();
    }
    match first_cover.get(cell) {
        Some(row) => format!("r{row}"),
        None => "-".to_string(),
    }
}

/// Render every projection plane of size `k` as a table, marking each cell
/// with the first data row that covered it (rows are 1-based in the order
/// given). Pairs render as grids; other sizes render as flat lists.
pub fn write_tables(
    model: &CategorizationModel,
    rows: &[CategorizationPoint],
    k: usize,
    limit: u64,
) -> Result<String, CoverageError> {
    let tables = ProjectionTables::empty(model, k);
    let total_cells: BigUint = tables
        .deltas()
        .iter()
        .map(|delta| delta_space(model, delta))
        .sum();
    if total_cells > BigUint::from(limit) {
        return Err(SpaceError::TooLarge {
            size: total_cells,
            limit,
        }
        .into());
    }

    // first row to land in each cell, per plane
    let mut first_cover: Vec<BTreeMap<Cell, usize>> = vec![BTreeMap::new(); tables.deltas().len()];
    for (row_idx, point) in rows.iter().enumerate() {
        for (pos, delta) in tables.deltas().iter().enumerate() {
            first_cover[pos]
                .entry(project(point, delta))
                .or_insert(row_idx + 1);
        }
    }

    let mut cache = FeasibilityCache::new();
    let mut out = String::new();
    for (pos, delta) in tables.deltas().iter().enumerate() {
        let _ = writeln!(out, "plane: {}", delta.label(model));
        if k == 2 {
            let row_cat = model.category(delta.categories()[0]);
            let col_cat = model.category(delta.categories()[1]);
            let mut grid: Vec<Vec<String>> = Vec::with_capacity(row_cat.len());
            for r in 0..row_cat.len() {
                let mut line = Vec::with_capacity(col_cat.len());
                for c in 0..col_cat.len() {
                    let cell = Cell(vec![r, c]);
                    line.push(cell_marker(
                        model,
                        delta,
                        &cell,
                        &first_cover[pos],
                        &mut cache,
                    ));
                }
                grid.push(line);
            }
            let row_width = row_cat.values.iter().map(|v| v.len()).max().unwrap_or(1);
            let col_widths: Vec<usize> = (0..col_cat.len())
                .map(|c| {
                    grid.iter()
                        .map(|line| line[c].len())
                        .chain([col_cat.values[c].len()])
                        .max()
                        .unwrap()
                })
                .collect();
            let mut header = format!("  {:row_width$}", "");
            for (c, width) in col_widths.iter().enumerate() {
                let _ = write!(header, "  {:>width$}", col_cat.values[c]);
            }
            let _ = writeln!(out, "{}", header.trim_end());
            for (r, line) in grid.iter().enumerate() {
                let mut rendered = format!("  {:row_width$}", row_cat.values[r]);
                for (c, width) in col_widths.iter().enumerate() {
                    let _ = write!(rendered, "  {:>width$}", line[c]);
                }
                let _ = writeln!(out, "{}", rendered.trim_end());
            }
        } else {
            for cell in delta_cells(model, delta) {
                let marker = cell_marker(model, delta, &cell, &first_cover[pos], &mut cache);
                let _ = writeln!(out, "  {}: {}", cell.label(model, delta), marker);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn stop_reason_str(reason: StopReason) -> &'static str {
    match reason {
        StopReason::FullCoverage => "full-coverage",
        StopReason::BudgetExhausted => "budget-exhausted",
    }
}

/// Generation trace as a flat tab-separated table, one line per generated
/// point, ready for plotting coverage growth.
pub fn write_trace(model: &CategorizationModel, trace: &GenerationTrace) -> String {
    let mut out = String::from("step\tpoint\tobjective\tnumerator\tdenominator\n");
    for (i, step) in trace.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            i + 1,
            point_labels(model, &step.point),
            step.objective,
            step.numerator,
            trace.denominator
        );
    }
    let _ = writeln!(out, "# reason: {}", stop_reason_str(trace.reason));
    out
}

/// Generation trace as JSON.
pub fn trace_json(model: &CategorizationModel, trace: &GenerationTrace) -> Value {
    json!({
        "reason": stop_reason_str(trace.reason),
        "initial_numerator": trace.initial_numerator.to_string(),
        "denominator": trace.denominator.to_string(),
        "vacuous": trace.vacuous,
        "steps": trace.steps.iter().enumerate().map(|(i, step)| json!({
            "step": i + 1,
            "point": point_labels(model, &step.point),
            "values": step.point.values(),
            "objective": step.objective,
            "numerator": step.numerator.to_string(),
            "decimal": decimal_string(&step.numerator, &trace.denominator, 6),
        })).collect::<Vec<_>>(),
    })
}
