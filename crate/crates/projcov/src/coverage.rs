//! Projection book-keeping and the two coverage metrics.
//!
//! Coverage of a data set is a ratio of big integers. The numerator caps each
//! cell's observed count at the cell's combined weight and sums the caps; the
//! denominator sums the combined weight of every cell that is reachable at
//! all. A cell is skipped when its weight is zero or when no
//! constraint-satisfying full point projects into it (decided by an
//! occupation check, never by materialising the satisfying set). Everything
//! is exact: the ratios survive spaces whose sizes overflow machine words.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{
    big_one, big_zero, combine_weights, CategorizationModel, CategorizationPoint, CombineOp,
    DataSet,
};
use crate::sat::{
    count_weighted_models, enumerate_satisfying, satisfiable_under, PartialAssignment, SpaceError,
};

/// A sorted set of `k` distinct category indices: one projection plane.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProjectionIndex(Vec<usize>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("projection must select between 1 and {n} categories, got {k}")]
    BadArity { k: usize, n: usize },
    #[error("projection indices must be strictly ascending and in range")]
    BadIndices,
}

impl ProjectionIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self, ProjectionError> {
        if indices.is_empty() || indices.len() > n {
            return Err(ProjectionError::BadArity {
                k: indices.len(),
                n,
            });
        }
        let ascending = indices.windows(2).all(|w| w[0] < w[1]);
        if !ascending || *indices.last().unwrap() >= n {
            return Err(ProjectionError::BadIndices);
        }
        Ok(ProjectionIndex(indices))
    }

    pub fn categories(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Category names joined with `,`, for reports.
    pub fn label(&self, model: &CategorizationModel) -> String {
        self.0
            .iter()
            .map(|&i| model.category(i).name.as_str())
            .join(",")
    }
}

/// One value tuple within a projection plane, aligned with its
/// [`ProjectionIndex`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell(pub Vec<usize>);

impl Cell {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    /// Value labels joined with `,`, for reports.
    pub fn label(&self, model: &CategorizationModel, delta: &ProjectionIndex) -> String {
        delta
            .categories()
            .iter()
            .zip(&self.0)
            .map(|(&cat, &val)| {
                format!(
                    "{}={}",
                    model.category(cat).name,
                    model.category(cat).values[val]
                )
            })
            .join(",")
    }
}

/// Restrict a full point to the categories of `delta`, in `delta` order.
pub fn project(point: &CategorizationPoint, delta: &ProjectionIndex) -> Cell {
    Cell(
        delta
            .categories()
            .iter()
            .map(|&i| point.values()[i])
            .collect(),
    )
}

/// Combined weight of a projected cell: the fold of the per-value weights of
/// the selected categories.
pub fn cell_weight(model: &CategorizationModel, delta: &ProjectionIndex, cell: &Cell) -> BigUint {
    let weights: Vec<u64> = delta
        .categories()
        .iter()
        .zip(cell.values())
        .map(|(&cat, &val)| model.weight(cat, val))
        .collect();
    combine_weights(&weights, model.combine_op()).expect("projection is non-empty")
}

/// All `C(n, k)` projection planes of size `k`, in lexicographic order.
pub fn all_projections(n: usize, k: usize) -> Vec<ProjectionIndex> {
    (0..n).combinations(k).map(ProjectionIndex).collect()
}

/// Iterate every cell of one plane in lexicographic order.
pub fn delta_cells<'a>(
    model: &'a CategorizationModel,
    delta: &'a ProjectionIndex,
) -> impl Iterator<Item = Cell> + 'a {
    delta
        .categories()
        .iter()
        .map(|&i| 0..model.domain_size(i))
        .multi_cartesian_product()
        .map(Cell)
}

/// Number of cells in one plane.
pub fn delta_space(model: &CategorizationModel, delta: &ProjectionIndex) -> BigUint {
    delta.categories().iter().fold(big_one(), |acc, &i| {
        acc * BigUint::from(model.domain_size(i))
    })
}

/// Observed projection counts of a data set: for every plane of size `k`, a
/// map from occupied cell to its multiplicity. Unoccupied cells are implicit
/// zeros, so memory stays proportional to the data, not the space.
#[derive(Debug, Clone)]
pub struct ProjectionTables {
    k: usize,
    deltas: Vec<ProjectionIndex>,
    counts: Vec<BTreeMap<Cell, u64>>,
    total_points: u64,
}

impl ProjectionTables {
    /// Tables with every count zero.
    pub fn empty(model: &CategorizationModel, k: usize) -> Self {
        assert!(
            k >= 1 && k <= model.len(),
            "k must be between 1 and {}",
            model.len()
        );
        let deltas = all_projections(model.len(), k);
        let counts = vec![BTreeMap::new(); deltas.len()];
        ProjectionTables {
            k,
            deltas,
            counts,
            total_points: 0,
        }
    }

    /// Project every data point (with multiplicity) into every plane.
    pub fn build(model: &CategorizationModel, dataset: &DataSet, k: usize) -> Self {
        let mut tables = ProjectionTables::empty(model, k);
        for (point, mult) in dataset.iter() {
            tables.record_many(point, mult);
        }
        tables
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn deltas(&self) -> &[ProjectionIndex] {
        &self.deltas
    }

    /// Total recorded points, counting multiplicity.
    pub fn total_points(&self) -> u64 {
        self.total_points
    }

    /// Observed count of one cell (zero when never hit).
    pub fn count(&self, delta_pos: usize, cell: &Cell) -> u64 {
        self.counts[delta_pos].get(cell).copied().unwrap_or(0)
    }

    /// Occupied cells of one plane with their counts, in cell order.
    pub fn occupied(&self, delta_pos: usize) -> impl Iterator<Item = (&Cell, u64)> {
        self.counts[delta_pos].iter().map(|(c, &m)| (c, m))
    }

    /// Record one additional point.
    pub fn record(&mut self, point: &CategorizationPoint) {
        self.record_many(point, 1);
    }

    fn record_many(&mut self, point: &CategorizationPoint, mult: u64) {
        for (pos, delta) in self.deltas.iter().enumerate() {
            let cell = project(point, delta);
            *self.counts[pos].entry(cell).or_insert(0) += mult;
        }
        self.total_points += mult;
    }
}

/// Memoised occupation checks: feasibility of a projected cell never changes
/// while the model is fixed, so generation loops share one cache.
#[derive(Debug, Default)]
pub struct FeasibilityCache {
    known: BTreeMap<(ProjectionIndex, Cell), bool>,
}

impl FeasibilityCache {
    pub fn new() -> Self {
        FeasibilityCache::default()
    }

    /// Whether some constraint-satisfying full point projects into `cell`.
    pub fn is_feasible(
        &mut self,
        model: &CategorizationModel,
        delta: &ProjectionIndex,
        cell: &Cell,
    ) -> bool {
        if model.constraints().is_empty() {
            return true;
        }
        let key = (delta.clone(), cell.clone());
        if let Some(&known) = self.known.get(&key) {
            return known;
        }
        let pairs: Vec<(usize, usize)> = delta
            .categories()
            .iter()
            .copied()
            .zip(cell.values().iter().copied())
            .collect();
        let partial = PartialAssignment::new(model, &pairs).expect("cell is in range");
        let feasible = satisfiable_under(model, &partial);
        self.known.insert(key, feasible);
        feasible
    }
}

/// What a coverage figure was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageScope {
    /// Whole-space coverage: every satisfying full point is its own cell.
    Full,
    /// Sum over all projection planes of size `k`.
    Projection { k: usize },
}

/// Numerator and denominator contributed by one plane.
#[derive(Debug, Clone)]
pub struct ProjectionShare {
    pub delta: ProjectionIndex,
    pub numerator: BigUint,
    pub denominator: BigUint,
}

/// An exact coverage figure plus the accounting behind it.
#[derive(Debug, Clone)]
pub struct CoverageResult {
    pub scope: CoverageScope,
    pub numerator: BigUint,
    pub denominator: BigUint,
    /// Denominator is zero: nothing is required, coverage is defined as 1.
    pub vacuous: bool,
    pub per_projection: Vec<ProjectionShare>,
    /// Cells that are feasible and weight-positive (for [`CoverageScope::Full`],
    /// satisfying points with positive weight).
    pub coverable_cells: BigUint,
    pub infeasible_cells: Vec<(ProjectionIndex, Cell)>,
    pub zero_weight_cells: Vec<(ProjectionIndex, Cell)>,
    /// False when the space was too large to list excluded cells explicitly
    /// (totals are exact regardless).
    pub cell_lists_complete: bool,
}

impl CoverageResult {
    /// The coverage ratio, reduced. Vacuous coverage is 1.
    pub fn ratio(&self) -> BigRational {
        if self.vacuous {
            return BigRational::one();
        }
        BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(self.denominator.clone()),
        )
    }

    pub fn is_full(&self) -> bool {
        self.vacuous || self.numerator == self.denominator
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error("k must be between 1 and {n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Per-plane denominator accounting.
struct DeltaDenominator {
    value: BigUint,
    coverable: BigUint,
    infeasible: Vec<Cell>,
    zero_weight: Vec<Cell>,
    lists_complete: bool,
}

/// Closed-form plane denominator for the unconstrained case; never
/// enumerates cells, so it scales to spaces far beyond the enumeration
/// limit.
fn closed_delta_denominator(model: &CategorizationModel, delta: &ProjectionIndex) -> BigUint {
    let cats = delta.categories();
    match model.combine_op() {
        CombineOp::Product => cats
            .iter()
            .map(|&i| {
                model
                    .category(i)
                    .weights
                    .iter()
                    .map(|&w| BigUint::from(w))
                    .sum::<BigUint>()
            })
            .product(),
        CombineOp::Sum => {
            // sum over cells distributes per category
            let mut total = big_zero();
            for &i in cats {
                let weight_sum: BigUint = model
                    .category(i)
                    .weights
                    .iter()
                    .map(|&w| BigUint::from(w))
                    .sum();
                let others: BigUint = cats
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| BigUint::from(model.domain_size(j)))
                    .product();
                total += weight_sum * others;
            }
            total
        }
        CombineOp::Max => {
            // distribution counting over the distinct weight values
            let mut values: Vec<u64> = cats
                .iter()
                .flat_map(|&i| model.category(i).weights.iter().copied())
                .collect();
            values.sort_unstable();
            values.dedup();
            let cells_with_max_at_most = |v: u64| -> BigUint {
                cats.iter()
                    .map(|&i| {
                        BigUint::from(
                            model
                                .category(i)
                                .weights
                                .iter()
                                .filter(|&&w| w <= v)
                                .count(),
                        )
                    })
                    .product()
            };
            let mut total = big_zero();
            let mut prev = big_zero();
            for v in values {
                let le = cells_with_max_at_most(v);
                total += BigUint::from(v) * (&le - &prev);
                prev = le;
            }
            total
        }
    }
}

/// Closed-form count of weight-positive cells in one plane (unconstrained).
fn closed_delta_coverable(model: &CategorizationModel, delta: &ProjectionIndex) -> BigUint {
    let cats = delta.categories();
    match model.combine_op() {
        CombineOp::Product => cats
            .iter()
            .map(|&i| BigUint::from(model.category(i).weights.iter().filter(|&&w| w > 0).count()))
            .product(),
        // sum and max are positive unless every selected weight is zero
        CombineOp::Sum | CombineOp::Max => {
            let all: BigUint = delta_space(model, delta);
            let all_zero: BigUint = cats
                .iter()
                .map(|&i| {
                    BigUint::from(
                        model
                            .category(i)
                            .weights
                            .iter()
                            .filter(|&&w| w == 0)
                            .count(),
                    )
                })
                .product();
            all - all_zero
        }
    }
}

fn delta_denominator(
    model: &CategorizationModel,
    delta: &ProjectionIndex,
    enumerable: bool,
    cache: &mut FeasibilityCache,
) -> DeltaDenominator {
    let unconstrained = model.constraints().is_empty();
    let has_zero_weight = delta
        .categories()
        .iter()
        .any(|&i| model.category(i).weights.contains(&0));

    if unconstrained && (!has_zero_weight || !enumerable) {
        return DeltaDenominator {
            value: closed_delta_denominator(model, delta),
            coverable: closed_delta_coverable(model, delta),
            infeasible: Vec::new(),
            zero_weight: Vec::new(),
            lists_complete: !has_zero_weight,
        };
    }

    // Enumerating path: needed to occupation-check cells (constrained case)
    // or to list zero-weight cells. Callers guard `enumerable` for the
    // constrained case.
    let mut value = big_zero();
    let mut coverable = big_zero();
    let mut infeasible = Vec::new();
    let mut zero_weight = Vec::new();
    for cell in delta_cells(model, delta) {
        let weight = cell_weight(model, delta, &cell);
        if weight.is_zero() {
            zero_weight.push(cell);
        } else if cache.is_feasible(model, delta, &cell) {
            value += weight;
            coverable += big_one();
        } else {
            infeasible.push(cell);
        }
    }
    DeltaDenominator {
        value,
        coverable,
        infeasible,
        zero_weight,
        lists_complete: true,
    }
}

fn validate_k(model: &CategorizationModel, k: usize) -> Result<(), CoverageError> {
    if k < 1 || k > model.len() {
        return Err(CoverageError::InvalidK { k, n: model.len() });
    }
    Ok(())
}

/// Whether the per-plane cell spaces fit under the enumeration limit.
fn projection_space_enumerable(model: &CategorizationModel, k: usize, limit: u64) -> bool {
    let total: BigUint = all_projections(model.len(), k)
        .iter()
        .map(|delta| delta_space(model, delta))
        .sum();
    total <= BigUint::from(limit)
}

/// The `k`-projection denominator alone; no data set involved.
///
/// Unconstrained models use closed forms per plane and never enumerate, so
/// this stays exact for spaces of astronomical size. Constrained models
/// occupation-check every cell and are gated by `limit`.
pub fn k_denominator(
    model: &CategorizationModel,
    k: usize,
    limit: u64,
) -> Result<BigUint, CoverageError> {
    validate_k(model, k)?;
    let unconstrained = model.constraints().is_empty();
    if unconstrained {
        return Ok(all_projections(model.len(), k)
            .iter()
            .map(|delta| closed_delta_denominator(model, delta))
            .sum());
    }
    if !projection_space_enumerable(model, k, limit) {
        let total: BigUint = all_projections(model.len(), k)
            .iter()
            .map(|delta| delta_space(model, delta))
            .sum();
        return Err(SpaceError::TooLarge { size: total, limit }.into());
    }
    let mut cache = FeasibilityCache::new();
    let mut total = big_zero();
    for delta in all_projections(model.len(), k) {
        total += delta_denominator(model, &delta, true, &mut cache).value;
    }
    Ok(total)
}

/// `k`-projection coverage of a data set, as an exact ratio with per-plane
/// accounting.
pub fn k_coverage(
    model: &CategorizationModel,
    dataset: &DataSet,
    k: usize,
    limit: u64,
) -> Result<CoverageResult, CoverageError> {
    validate_k(model, k)?;
    let tables = ProjectionTables::build(model, dataset, k);
    coverage_from_tables(model, &tables, limit)
}

/// Coverage computed from already-built tables (the generation loop keeps
/// its tables incremental and reuses this).
pub fn coverage_from_tables(
    model: &CategorizationModel,
    tables: &ProjectionTables,
    limit: u64,
) -> Result<CoverageResult, CoverageError> {
    let k = tables.k();
    let enumerable = projection_space_enumerable(model, k, limit);
    if !model.constraints().is_empty() && !enumerable {
        let total: BigUint = tables
            .deltas()
            .iter()
            .map(|delta| delta_space(model, delta))
            .sum();
        return Err(SpaceError::TooLarge { size: total, limit }.into());
    }

    let mut cache = FeasibilityCache::new();
    let mut numerator = big_zero();
    let mut denominator = big_zero();
    let mut coverable = big_zero();
    let mut per_projection = Vec::with_capacity(tables.deltas().len());
    let mut infeasible_cells = Vec::new();
    let mut zero_weight_cells = Vec::new();
    let mut lists_complete = true;

    for (pos, delta) in tables.deltas().iter().enumerate() {
        let mut num_delta = big_zero();
        for (cell, count) in tables.occupied(pos) {
            let weight = cell_weight(model, delta, cell);
            num_delta += BigUint::from(count).min(weight);
        }
        let den = delta_denominator(model, delta, enumerable, &mut cache);
        numerator += &num_delta;
        denominator += &den.value;
        coverable += &den.coverable;
        lists_complete &= den.lists_complete;
        infeasible_cells.extend(den.infeasible.into_iter().map(|c| (delta.clone(), c)));
        zero_weight_cells.extend(den.zero_weight.into_iter().map(|c| (delta.clone(), c)));
        per_projection.push(ProjectionShare {
            delta: delta.clone(),
            numerator: num_delta,
            denominator: den.value,
        });
    }

    let vacuous = denominator.is_zero();
    Ok(CoverageResult {
        scope: CoverageScope::Projection { k },
        numerator,
        denominator,
        vacuous,
        per_projection,
        coverable_cells: coverable,
        infeasible_cells,
        zero_weight_cells,
        cell_lists_complete: lists_complete,
    })
}

/// Whole-space coverage: each distinct data point contributes its
/// multiplicity capped at its combined weight; the denominator is the exact
/// weighted count of constraint-satisfying points.
pub fn full_coverage(
    model: &CategorizationModel,
    dataset: &DataSet,
    limit: u64,
) -> Result<CoverageResult, CoverageError> {
    let denominator = count_weighted_models(model, limit)?;
    let mut coverable = big_zero();
    for point in enumerate_satisfying(model, limit)? {
        if !model.point_weight(&point).is_zero() {
            coverable += big_one();
        }
    }
    let mut numerator = big_zero();
    for (point, mult) in dataset.iter() {
        numerator += BigUint::from(mult).min(model.point_weight(point));
    }
    let vacuous = denominator.is_zero();
    Ok(CoverageResult {
        scope: CoverageScope::Full,
        numerator,
        denominator,
        vacuous,
        per_projection: Vec::new(),
        coverable_cells: coverable,
        infeasible_cells: Vec::new(),
        zero_weight_cells: Vec::new(),
        cell_lists_complete: true,
    })
}
