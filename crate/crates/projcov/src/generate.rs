//! Generation of new categorization points that raise coverage.
//!
//! Two routes exist. For 1-projection over an unconstrained model, a direct
//! scan completes the tables with a provably minimum number of points. For
//! everything else, each round encodes "find one point covering as many
//! still-improvable cells as possible" as a 0-1 program, solves it exactly,
//! and repeats until no improvable cell remains or the budget runs out. The
//! greedy loop is optimal per step, not globally: finding a globally minimal
//! completion is hard, which is why generation is round-by-round in the
//! first place.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::coverage::{
    cell_weight, coverage_from_tables, project, Cell, CoverageError, FeasibilityCache,
    ProjectionTables,
};
use crate::ilp::{solve, IlpProblem, IlpSolution};
use crate::model::{point_satisfies, CategorizationModel, CategorizationPoint, DataSet};
use crate::sat::{enumerate_satisfying, SpaceError};

/// Space cap for the brute-force reference generator.
pub const BRUTE_FORCE_LIMIT: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("1-projection completion requires an unconstrained model")]
    ConstrainedModel,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
}

/// Complete 1-projection coverage of an unconstrained model with a minimum
/// number of additional points.
///
/// Rounds scan categories in order; each category picks its first value whose
/// observed count is below the value's weight and claims one more occurrence
/// of it. Categories with nothing left to claim fall back to value 0. The
/// loop ends on the first round that claims nothing, which happens exactly
/// when the most deficient category has been completed, hence minimality.
pub fn minimum_one_projection(
    tables: &ProjectionTables,
    model: &CategorizationModel,
) -> Result<Vec<CategorizationPoint>, GenerateError> {
    assert_eq!(tables.k(), 1, "1-projection completion needs k=1 tables");
    if !model.constraints().is_empty() {
        return Err(GenerateError::ConstrainedModel);
    }
    let n = model.len();
    let mut counts: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            (0..model.domain_size(i))
                .map(|j| tables.count(i, &Cell(vec![j])))
                .collect()
        })
        .collect();
    let mut points = Vec::new();
    loop {
        let mut picked: Vec<Option<usize>> = vec![None; n];
        for (i, row) in counts.iter_mut().enumerate() {
            for (j, count) in row.iter_mut().enumerate() {
                if *count < model.weight(i, j) {
                    picked[i] = Some(j);
                    *count += 1;
                    break;
                }
            }
        }
        if picked.iter().all(Option::is_none) {
            return Ok(points);
        }
        let values: Vec<usize> = picked.into_iter().map(|p| p.unwrap_or(0)).collect();
        points.push(CategorizationPoint(values));
    }
}

/// Exact number of points [`minimum_one_projection`] will emit for the given
/// tables: the largest per-category deficit.
pub fn one_projection_deficit(tables: &ProjectionTables, model: &CategorizationModel) -> u64 {
    assert_eq!(tables.k(), 1);
    (0..model.len())
        .map(|i| {
            (0..model.domain_size(i))
                .map(|j| {
                    model
                        .weight(i, j)
                        .saturating_sub(tables.count(i, &Cell(vec![j])))
                })
                .sum::<u64>()
        })
        .max()
        .unwrap_or(0)
}

/// The 0-1 program for one generation round, plus the variable layout needed
/// to decode its solution back into a point.
#[derive(Debug)]
pub struct NextPointEncoding {
    pub problem: IlpProblem,
    value_vars: Vec<Vec<usize>>,
    occ_cells: Vec<(usize, Cell)>,
    occ_vars: Vec<usize>,
}

impl NextPointEncoding {
    /// ILP variable carrying "category `i` takes value `j`".
    pub fn value_var(&self, category: usize, value: usize) -> usize {
        self.value_vars[category][value]
    }

    /// The improvable cells, as `(plane position, cell)`, in the order their
    /// occupancy variables were created.
    pub fn improvable_cells(&self) -> &[(usize, Cell)] {
        &self.occ_cells
    }

    /// ILP variable carrying "the new point lands in improvable cell `idx`".
    pub fn occ_var(&self, idx: usize) -> usize {
        self.occ_vars[idx]
    }

    pub fn occ_count(&self) -> usize {
        self.occ_vars.len()
    }

    /// Read the chosen value per category out of a solved assignment.
    pub fn decode(&self, assignment: &[bool]) -> CategorizationPoint {
        let values = self
            .value_vars
            .iter()
            .map(|vars| {
                vars.iter()
                    .position(|&v| assignment[v])
                    .expect("exactly-one constraint guarantees a chosen value")
            })
            .collect();
        CategorizationPoint(values)
    }
}

/// Encode the search for one point that newly covers as many improvable
/// cells as possible. Returns `None` when no feasible, weight-positive cell
/// is still below its weight, i.e. coverage is already full.
pub fn encode_next_point(
    tables: &ProjectionTables,
    model: &CategorizationModel,
) -> Option<NextPointEncoding> {
    encode_with_cache(tables, model, &mut FeasibilityCache::new())
}

fn encode_with_cache(
    tables: &ProjectionTables,
    model: &CategorizationModel,
    cache: &mut FeasibilityCache,
) -> Option<NextPointEncoding> {
    let k = tables.k() as i64;
    let mut problem = IlpProblem::new();

    // one selector per category value, with an exactly-one constraint each
    let value_vars: Vec<Vec<usize>> = (0..model.len())
        .map(|i| {
            let cat = model.category(i);
            let vars: Vec<usize> = (0..cat.len())
                .map(|j| problem.add_var(format!("var[{}={}]", cat.name, cat.values[j])))
                .collect();
            let terms: Vec<(usize, i64)> = vars.iter().map(|&v| (v, 1)).collect();
            problem
                .add_constraint(&terms, Some(1), Some(1))
                .expect("valid terms");
            vars
        })
        .collect();

    // one occupancy variable per improvable cell, linked to its selectors
    let mut occ_cells = Vec::new();
    let mut occ_vars = Vec::new();
    for (pos, delta) in tables.deltas().iter().enumerate() {
        for cell in crate::coverage::delta_cells(model, delta) {
            let weight = cell_weight(model, delta, &cell);
            if weight.is_zero() || BigUint::from(tables.count(pos, &cell)) >= weight {
                continue;
            }
            if !cache.is_feasible(model, delta, &cell) {
                continue;
            }
            let occ = problem.add_var(format!("occ[{}]", cell.label(model, delta)));
            problem.set_objective(occ, 1);
            let mut terms: Vec<(usize, i64)> = delta
                .categories()
                .iter()
                .zip(cell.values())
                .map(|(&cat, &val)| (value_vars[cat][val], 1))
                .collect();
            terms.push((occ, -k));
            problem
                .add_constraint(&terms, Some(0), Some(k - 1))
                .expect("valid terms");
            occ_cells.push((pos, cell));
            occ_vars.push(occ);
        }
    }
    if occ_vars.is_empty() {
        return None;
    }

    // the constraint set, clause by clause, as linear inequalities
    for clause in &model.constraints().clauses {
        let mut terms: Vec<(usize, i64)> = Vec::with_capacity(clause.literals().len());
        let mut negated = 0i64;
        for lit in clause.literals() {
            match lit.op {
                crate::model::LiteralOp::Eq => terms.push((value_vars[lit.category][lit.value], 1)),
                crate::model::LiteralOp::Neq => {
                    terms.push((value_vars[lit.category][lit.value], -1));
                    negated += 1;
                }
            }
        }
        problem
            .add_constraint(&terms, Some(1 - negated), None)
            .expect("valid terms");
    }

    Some(NextPointEncoding {
        problem,
        value_vars,
        occ_cells,
        occ_vars,
    })
}

/// Solve one generation round to optimality: the point covering the most
/// still-improvable cells, together with how many it covers. `None` means
/// coverage is already full.
pub fn next_best_point(
    tables: &ProjectionTables,
    model: &CategorizationModel,
) -> Option<(CategorizationPoint, u64)> {
    next_best_with_cache(tables, model, &mut FeasibilityCache::new())
}

fn next_best_with_cache(
    tables: &ProjectionTables,
    model: &CategorizationModel,
    cache: &mut FeasibilityCache,
) -> Option<(CategorizationPoint, u64)> {
    let encoding = encode_with_cache(tables, model, cache)?;
    match solve(&encoding.problem) {
        IlpSolution::Optimal {
            assignment,
            objective,
        } => {
            let point = encoding.decode(&assignment);
            debug_assert!(point_satisfies(model.constraints(), &point));
            debug_assert!(
                objective >= 1,
                "improvable feasible cells guarantee progress"
            );
            Some((point, objective as u64))
        }
        // every improvable cell passed its occupation check, so a witness
        // point exists and the program cannot be infeasible
        IlpSolution::Infeasible => unreachable!("encoding admits a satisfying point"),
    }
}

/// Why a generation run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FullCoverage,
    BudgetExhausted,
}

/// One generated point and the coverage standing after it.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub point: CategorizationPoint,
    /// Improvable cells newly covered by this point.
    pub objective: u64,
    pub numerator: BigUint,
    pub ratio: BigRational,
}

/// The ordered record of a generation run.
#[derive(Debug, Clone)]
pub struct GenerationTrace {
    pub steps: Vec<TraceStep>,
    pub reason: StopReason,
    pub initial_numerator: BigUint,
    pub denominator: BigUint,
    pub vacuous: bool,
}

impl GenerationTrace {
    pub fn points(&self) -> impl Iterator<Item = &CategorizationPoint> {
        self.steps.iter().map(|s| &s.point)
    }

    pub fn final_numerator(&self) -> BigUint {
        self.steps
            .last()
            .map_or(self.initial_numerator.clone(), |s| s.numerator.clone())
    }

    pub fn final_ratio(&self) -> BigRational {
        ratio_of(&self.final_numerator(), &self.denominator, self.vacuous)
    }
}

fn ratio_of(numerator: &BigUint, denominator: &BigUint, vacuous: bool) -> BigRational {
    if vacuous {
        return BigRational::from_integer(1.into());
    }
    BigRational::new(numerator.clone().into(), denominator.clone().into())
}

/// Greedily generate points until full `k`-projection coverage or until
/// `budget` points have been emitted, whichever comes first. Each round is
/// solved to per-step optimality; tables are updated incrementally and the
/// occupation-check cache is shared across rounds.
pub fn achieve_full_coverage(
    model: &CategorizationModel,
    dataset: &DataSet,
    k: usize,
    budget: u64,
    limit: u64,
) -> Result<GenerationTrace, CoverageError> {
    let mut tables = ProjectionTables::build(model, dataset, k);
    let initial = coverage_from_tables(model, &tables, limit)?;
    let mut cache = FeasibilityCache::new();
    let mut numerator = initial.numerator.clone();
    let mut steps = Vec::new();
    let reason = loop {
        // cheap fullness probe first: encoding exists iff something is improvable
        let Some(encoding) = encode_with_cache(&tables, model, &mut cache) else {
            break StopReason::FullCoverage;
        };
        if steps.len() as u64 >= budget {
            break StopReason::BudgetExhausted;
        }
        let IlpSolution::Optimal {
            assignment,
            objective,
        } = solve(&encoding.problem)
        else {
            unreachable!("encoding admits a satisfying point");
        };
        let point = encoding.decode(&assignment);
        debug_assert!(point_satisfies(model.constraints(), &point));
        tables.record(&point);
        // each newly covered improvable cell raises the capped sum by one
        numerator += BigUint::from(objective as u64);
        steps.push(TraceStep {
            point,
            objective: objective as u64,
            numerator: numerator.clone(),
            ratio: ratio_of(&numerator, &initial.denominator, initial.vacuous),
        });
    };
    Ok(GenerationTrace {
        steps,
        reason,
        initial_numerator: initial.numerator,
        denominator: initial.denominator,
        vacuous: initial.vacuous,
    })
}

/// Run the direct 1-projection completion and wrap it in a trace, the same
/// shape the greedy loop produces. Points beyond `budget` are withheld and
/// the trace reports an exhausted budget instead.
pub fn one_projection_trace(
    model: &CategorizationModel,
    dataset: &DataSet,
    budget: u64,
    limit: u64,
) -> Result<GenerationTrace, GenerateError> {
    let mut tables = ProjectionTables::build(model, dataset, 1);
    let initial = coverage_from_tables(model, &tables, limit).map_err(GenerateError::from)?;
    let points = minimum_one_projection(&tables, model)?;
    let truncated = points.len() as u64 > budget;
    let mut numerator = initial.numerator.clone();
    let mut steps = Vec::new();
    for point in points.into_iter().take(budget as usize) {
        // count the value cells this point pushes closer to their weight
        let mut objective = 0u64;
        for (pos, delta) in tables.deltas().iter().enumerate() {
            let cell = project(&point, delta);
            let weight = cell_weight(model, delta, &cell);
            if !weight.is_zero() && BigUint::from(tables.count(pos, &cell)) < weight {
                objective += 1;
            }
        }
        tables.record(&point);
        numerator += BigUint::from(objective);
        steps.push(TraceStep {
            point,
            objective,
            numerator: numerator.clone(),
            ratio: ratio_of(&numerator, &initial.denominator, initial.vacuous),
        });
    }
    Ok(GenerationTrace {
        steps,
        reason: if truncated {
            StopReason::BudgetExhausted
        } else {
            StopReason::FullCoverage
        },
        initial_numerator: initial.numerator,
        denominator: initial.denominator,
        vacuous: initial.vacuous,
    })
}

/// Reference generator: score every constraint-satisfying point by the
/// number of improvable cells it would newly cover and return the
/// lexicographically first maximiser. `None` only when the constraint set is
/// unsatisfiable.
pub fn brute_force_next_point(
    model: &CategorizationModel,
    dataset: &DataSet,
    k: usize,
) -> Result<Option<(CategorizationPoint, u64)>, SpaceError> {
    let tables = ProjectionTables::build(model, dataset, k);
    let mut best: Option<(CategorizationPoint, u64)> = None;
    for point in enumerate_satisfying(model, BRUTE_FORCE_LIMIT)? {
        let mut score = 0u64;
        for (pos, delta) in tables.deltas().iter().enumerate() {
            let cell = project(&point, delta);
            let weight = cell_weight(model, delta, &cell);
            if !weight.is_zero() && BigUint::from(tables.count(pos, &cell)) < weight {
                score += 1;
            }
        }
        if best.as_ref().is_none_or(|(_, s)| score > *s) {
            best = Some((point, score));
        }
    }
    Ok(best)
}

/// Upper bound on how many points any run can emit when the model is
/// unconstrained: the total weight of all cells.
pub fn unconstrained_point_bound(model: &CategorizationModel, k: usize) -> BigUint {
    crate::coverage::all_projections(model.len(), k)
        .iter()
        .map(|delta| {
            crate::coverage::delta_cells(model, delta)
                .map(|cell| cell_weight(model, delta, &cell))
                .sum::<BigUint>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::k_coverage;
    use crate::model::{Category, Clause, CombineOp, ConstraintSet, Literal};
    use crate::sat::DEFAULT_ENUM_LIMIT;

    fn binary_model(n: usize) -> CategorizationModel {
        let cats = (0..n)
            .map(|i| Category::uniform(format!("c{}", i + 1), &["0", "1"]))
            .collect();
        CategorizationModel::new(cats, CombineOp::Product, ConstraintSet::empty()).unwrap()
    }

    fn example3_dataset(model: &CategorizationModel) -> DataSet {
        let mut ds = DataSet::new();
        for p in [vec![0, 0, 1, 1], vec![1, 0, 0, 0], vec![1, 0, 0, 1]] {
            ds.insert(model, p.into(), 1).unwrap();
        }
        ds
    }

    fn lanes_model() -> CategorizationModel {
        let cats = vec![
            Category::uniform("weather", &["sunny", "cloudy", "rainy"]),
            Category::uniform("curve", &["straight", "curvy"]),
            Category::uniform("total_lanes", &["1", "2"]),
            Category::uniform("current_lane", &["1", "2"]),
            Category::uniform("forward_car", &["no", "yes"]),
            Category::uniform("oncoming_car", &["no", "yes"]),
        ];
        let cs = ConstraintSet {
            clauses: vec![Clause(vec![Literal::neq(2, 0), Literal::neq(3, 1)])],
        };
        CategorizationModel::new(cats, CombineOp::Product, cs).unwrap()
    }

    #[test]
    fn one_projection_completion_single_point() {
        let model = binary_model(4);
        let ds = example3_dataset(&model);
        let tables = ProjectionTables::build(&model, &ds, 1);
        let points = minimum_one_projection(&tables, &model).unwrap();
        assert_eq!(points, vec![CategorizationPoint(vec![0, 1, 0, 0])]);
        assert_eq!(points.len() as u64, one_projection_deficit(&tables, &model));

        // appending the result completes 1-projection coverage
        let mut extended = ds.clone();
        for p in points {
            extended.insert(&model, p, 1).unwrap();
        }
        let cov = k_coverage(&model, &extended, 1, DEFAULT_ENUM_LIMIT).unwrap();
        assert!(cov.is_full());
    }

    #[test]
    fn one_projection_already_complete() {
        let model = binary_model(2);
        let mut ds = DataSet::new();
        for p in [vec![0, 0], vec![1, 1]] {
            ds.insert(&model, p.into(), 1).unwrap();
        }
        let tables = ProjectionTables::build(&model, &ds, 1);
        assert_eq!(minimum_one_projection(&tables, &model).unwrap(), vec![]);
        assert_eq!(one_projection_deficit(&tables, &model), 0);
    }

    #[test]
    fn one_projection_from_empty() {
        let model = binary_model(2);
        let tables = ProjectionTables::build(&model, &DataSet::new(), 1);
        let points = minimum_one_projection(&tables, &model).unwrap();
        let expected: Vec<CategorizationPoint> = vec![vec![0, 0].into(), vec![1, 1].into()];
        assert_eq!(points, expected);
    }

    #[test]
    fn one_projection_respects_multiplicity_weights() {
        // one category, one value, weight 2: the same point twice
        let cats = vec![Category::weighted("only", &["v"], &[2])];
        let model =
            CategorizationModel::new(cats, CombineOp::Product, ConstraintSet::empty()).unwrap();
        let tables = ProjectionTables::build(&model, &DataSet::new(), 1);
        let points = minimum_one_projection(&tables, &model).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0], points[1]);
    }

    #[test]
    fn one_projection_rejects_constraints() {
        let model = lanes_model();
        let tables = ProjectionTables::build(&model, &DataSet::new(), 1);
        assert_eq!(
            minimum_one_projection(&tables, &model),
            Err(GenerateError::ConstrainedModel)
        );
    }

    #[test]
    fn deficit_formula_matches_output_size() {
        let cats = vec![
            Category::weighted("a", &["x", "y"], &[2, 1]),
            Category::weighted("b", &["x", "y", "z"], &[1, 0, 2]),
        ];
        let model =
            CategorizationModel::new(cats, CombineOp::Product, ConstraintSet::empty()).unwrap();
        let mut ds = DataSet::new();
        ds.insert(&model, vec![0, 2].into(), 1).unwrap();
        let tables = ProjectionTables::build(&model, &ds, 1);
        let points = minimum_one_projection(&tables, &model).unwrap();
        assert_eq!(points.len() as u64, one_projection_deficit(&tables, &model));
        let mut extended = ds;
        for p in points {
            extended.insert(&model, p, 1).unwrap();
        }
        assert!(k_coverage(&model, &extended, 1, DEFAULT_ENUM_LIMIT)
            .unwrap()
            .is_full());
    }

    #[test]
    fn encoding_matches_bookkeeping_example() {
        let model = binary_model(4);
        let ds = example3_dataset(&model);
        let tables = ProjectionTables::build(&model, &ds, 2);
        let encoding = encode_next_point(&tables, &model).unwrap();

        // ten empty cells across the six planes
        assert_eq!(encoding.occ_count(), 10);

        // the linking constraint for cell (c1=0, c2=1):
        //   0 <= var[c1=0] + var[c2=1] - 2 occ <= 1
        let occ_idx = encoding
            .improvable_cells()
            .iter()
            .position(|(pos, cell)| *pos == 0 && cell.values() == [0, 1])
            .expect("cell 01 of the first plane is improvable");
        let occ = encoding.occ_var(occ_idx);
        let var_c1_0 = encoding.value_var(0, 0);
        let var_c2_1 = encoding.value_var(1, 1);
        let found = encoding.problem.constraints().iter().any(|c| {
            c.lo == Some(0)
                && c.hi == Some(1)
                && c.terms() == [(var_c1_0, 1), (var_c2_1, 1), (occ, -2)]
        });
        assert!(found, "expected verbatim linking constraint");
    }

    #[test]
    fn encoding_none_when_fully_covered() {
        let model = binary_model(2);
        let mut ds = DataSet::new();
        for p in [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] {
            ds.insert(&model, p.into(), 1).unwrap();
        }
        let tables = ProjectionTables::build(&model, &ds, 2);
        assert!(encode_next_point(&tables, &model).is_none());
        assert!(next_best_point(&tables, &model).is_none());
    }

    #[test]
    fn next_best_point_objective_matches_brute_force() {
        let model = binary_model(4);
        let ds = example3_dataset(&model);
        let tables = ProjectionTables::build(&model, &ds, 2);
        let (_, objective) = next_best_point(&tables, &model).unwrap();
        assert_eq!(objective, 5);
        let (_, brute) = brute_force_next_point(&model, &ds, 2).unwrap().unwrap();
        assert_eq!(brute, 5);
    }

    #[test]
    fn generated_points_respect_constraints() {
        let model = lanes_model();
        let tables = ProjectionTables::build(&model, &DataSet::new(), 2);
        let (point, objective) = next_best_point(&tables, &model).unwrap();
        assert!(point_satisfies(model.constraints(), &point));
        assert!(objective >= 1);
        // never the impossible lane combination
        assert!(!(point.values()[2] == 0 && point.values()[3] == 1));
    }

    #[test]
    fn clause_encoding_survives_repeated_and_tautological_literals() {
        // (a=x | a=x) forces a=x; (b=u | b!=u) is a tautology; both shapes
        // are legal clauses and their linear forms must mean the same thing
        let cats = vec![
            Category::uniform("a", &["x", "y"]),
            Category::uniform("b", &["u", "v"]),
            Category::uniform("c", &["s", "t"]),
        ];
        let cs = ConstraintSet {
            clauses: vec![
                Clause(vec![Literal::eq(0, 0), Literal::eq(0, 0)]),
                Clause(vec![Literal::eq(1, 0), Literal::neq(1, 0)]),
                Clause(vec![Literal::neq(2, 1), Literal::neq(2, 1)]),
            ],
        };
        let model = CategorizationModel::new(cats, CombineOp::Product, cs).unwrap();
        let trace =
            achieve_full_coverage(&model, &DataSet::new(), 2, 1_000, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        for step in &trace.steps {
            assert!(point_satisfies(model.constraints(), &step.point));
            assert_eq!(step.point.values()[0], 0, "a is pinned to x");
            assert_eq!(step.point.values()[2], 0, "c is pinned to s");
        }
        // reachable pair cells: a and c pinned, b free: 2 + 1 + 2
        let cov = k_coverage(&model, &DataSet::new(), 2, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(cov.coverable_cells, BigUint::from(5u32));
        let (_, brute) = brute_force_next_point(&model, &DataSet::new(), 2)
            .unwrap()
            .unwrap();
        let tables = ProjectionTables::build(&model, &DataSet::new(), 2);
        let (_, via_solver) = next_best_point(&tables, &model).unwrap();
        assert_eq!(via_solver, brute);
    }

    #[test]
    fn full_run_on_lane_model() {
        let model = lanes_model();
        let trace =
            achieve_full_coverage(&model, &DataSet::new(), 2, 1_000, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        assert!(
            trace.steps.len() >= 5,
            "69 coverable cells over 15 planes need >= 5 points"
        );
        assert!(
            trace.steps.len() <= 10,
            "greedy run took {} points",
            trace.steps.len()
        );
        // numerators strictly increase up to the denominator
        let mut last = trace.initial_numerator.clone();
        for step in &trace.steps {
            assert!(step.numerator > last);
            last = step.numerator.clone();
        }
        assert_eq!(last, trace.denominator);
        assert_eq!(trace.final_ratio(), BigRational::from_integer(1.into()));

        // replaying the generated points reproduces the claimed numerators
        let mut ds = DataSet::new();
        for step in &trace.steps {
            ds.insert(&model, step.point.clone(), 1).unwrap();
            let cov = k_coverage(&model, &ds, 2, DEFAULT_ENUM_LIMIT).unwrap();
            assert_eq!(cov.numerator, step.numerator);
        }
    }

    #[test]
    fn trace_on_already_full_dataset_is_empty() {
        let model = binary_model(2);
        let mut ds = DataSet::new();
        for p in [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] {
            ds.insert(&model, p.into(), 1).unwrap();
        }
        let trace = achieve_full_coverage(&model, &ds, 2, 10, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        assert!(trace.steps.is_empty());
        assert_eq!(trace.final_ratio(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn budget_limits_are_honoured() {
        let model = binary_model(3);
        let trace =
            achieve_full_coverage(&model, &DataSet::new(), 2, 1, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::BudgetExhausted);
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(
            BigUint::from(trace.steps[0].objective),
            trace.steps[0].numerator
        );

        let zero =
            achieve_full_coverage(&model, &DataSet::new(), 2, 0, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(zero.reason, StopReason::BudgetExhausted);
        assert!(zero.steps.is_empty());
    }

    #[test]
    fn one_projection_trace_matches_direct_run() {
        let model = binary_model(4);
        let ds = example3_dataset(&model);
        let trace = one_projection_trace(&model, &ds, u64::MAX, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        let points: Vec<_> = trace.points().cloned().collect();
        assert_eq!(points, vec![CategorizationPoint(vec![0, 1, 0, 0])]);
        assert_eq!(trace.final_ratio(), BigRational::from_integer(1.into()));
        // the replayed numerator agrees with a fresh coverage computation
        let mut extended = ds.clone();
        extended.insert(&model, points[0].clone(), 1).unwrap();
        let cov = k_coverage(&model, &extended, 1, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(cov.numerator, trace.final_numerator());

        let capped = one_projection_trace(&model, &ds, 0, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(capped.reason, StopReason::BudgetExhausted);
        assert!(capped.steps.is_empty());
    }

    #[test]
    fn brute_force_on_full_tables_scores_zero() {
        let model = binary_model(2);
        let mut ds = DataSet::new();
        for p in [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] {
            ds.insert(&model, p.into(), 1).unwrap();
        }
        let (point, score) = brute_force_next_point(&model, &ds, 2).unwrap().unwrap();
        assert_eq!(score, 0);
        assert_eq!(
            point,
            CategorizationPoint(vec![0, 0]),
            "lexicographically first"
        );
    }

    #[test]
    fn trace_length_within_unconstrained_bound() {
        let cats = vec![
            Category::weighted("a", &["x", "y"], &[2, 1]),
            Category::weighted("b", &["x", "y"], &[1, 2]),
            Category::weighted("c", &["x", "y"], &[1, 1]),
        ];
        let model =
            CategorizationModel::new(cats, CombineOp::Product, ConstraintSet::empty()).unwrap();
        let trace =
            achieve_full_coverage(&model, &DataSet::new(), 2, 10_000, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        let bound = unconstrained_point_bound(&model, 2);
        assert!(BigUint::from(trace.steps.len() as u64) <= bound);
    }

    #[test]
    fn vacuous_model_generates_nothing() {
        let cats = vec![Category::weighted("a", &["x", "y"], &[0, 0])];
        let model =
            CategorizationModel::new(cats, CombineOp::Product, ConstraintSet::empty()).unwrap();
        let trace =
            achieve_full_coverage(&model, &DataSet::new(), 1, 10, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(trace.reason, StopReason::FullCoverage);
        assert!(trace.steps.is_empty());
        assert!(trace.vacuous);
        assert_eq!(trace.final_ratio(), BigRational::from_integer(1.into()));
    }
}
