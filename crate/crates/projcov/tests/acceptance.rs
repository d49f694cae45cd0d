//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `--nocapture`) and enforcing its runtime
//! budget. All comparisons are exact; nothing here tolerates rounding.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use projcov::{
    achieve_full_coverage, brute_force_next_point, check, count_weighted_models,
    enumerate_satisfying, full_coverage, k_coverage, k_denominator, minimum_one_projection,
    next_best_point, parse_dataset, parse_model, point_satisfies, satisfiable_under, solve,
    write_tables, CategorizationModel, CategorizationPoint, Cell, DataSet, IlpSolution,
    OnViolation, PartialAssignment, ProjectionTables, SolveOptions, StopReason, DEFAULT_ENUM_LIMIT,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn uint(v: u64) -> BigUint {
    BigUint::from(v)
}

fn finish(name: &str, start: Instant, budget: Duration) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < budget,
        "{name}: took {elapsed:?}, budget {budget:?}"
    );
    println!("PASS {name} in {elapsed:?}");
}

/// Three categories over three values each; the six data points collapse to
/// (2,0,2) x3, (1,1,1) x2, (0,2,0) x1.
fn grid_model(weights: Option<&str>, constraint: Option<&str>) -> CategorizationModel {
    let mut text = String::new();
    for c in ["x1", "x2", "x3"] {
        text.push_str(&format!("category {c}: 0, 1, 2\n"));
        if let Some(w) = weights {
            text.push_str(&format!("weights {c}: {w}\n"));
        }
    }
    if let Some(cs) = constraint {
        text.push_str(&format!("constraint: {cs}\n"));
    }
    parse_model(&text).unwrap()
}

fn grid_dataset(model: &CategorizationModel) -> DataSet {
    let data = "x1,x2,x3\n2,0,2\n2,0,2\n2,0,2\n1,1,1\n1,1,1\n0,2,0\n";
    parse_dataset(data, model, OnViolation::Reject)
        .unwrap()
        .dataset
}

fn driving_model() -> CategorizationModel {
    parse_model(
        "category weather: Sunny, Cloudy, Rainy\n\
         category lane_orientation: Straight, Curvy\n\
         category total_lanes: 1, 2\n\
         category current_lane: 1, 2\n\
         category forward_vehicle: yes, no\n\
         category oncoming_vehicle: yes, no\n\
         constraint: total_lanes != 1 | current_lane != 2\n",
    )
    .unwrap()
}

#[test]
fn criterion_1_full_coverage_regression() {
    let start = Instant::now();

    // unconstrained, unit weights: 3 distinct points over 27 cells
    let model = grid_model(None, None);
    let cov = full_coverage(&model, &grid_dataset(&model), DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(cov.ratio(), ratio(1, 9));
    assert_eq!((cov.numerator, cov.denominator), (uint(3), uint(27)));

    // one clause shrinks the satisfying space to 21
    let model = grid_model(None, Some("x1 != 0 | x2 = 2"));
    let cov = full_coverage(&model, &grid_dataset(&model), DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(cov.ratio(), ratio(1, 7));
    assert_eq!((cov.numerator, cov.denominator), (uint(3), uint(21)));

    // raising two value weights to 3: numerator 3+1+1 capped points,
    // denominator 9*3 + 3*12 + 1*12 = 75
    let model = parse_model(
        "category x1: 0, 1, 2\nweights x1: 1, 1, 3\n\
         category x2: 0, 1, 2\n\
         category x3: 0, 1, 2\nweights x3: 1, 1, 3\n",
    )
    .unwrap();
    let cov = full_coverage(&model, &grid_dataset(&model), DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(
        (cov.numerator.clone(), cov.denominator.clone()),
        (uint(5), uint(75))
    );
    assert_eq!(cov.ratio(), ratio(1, 15));

    finish(
        "criterion 1 (full-coverage regression)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_2_projection_regression() {
    let start = Instant::now();

    let model = grid_model(Some("2, 2, 2"), None);
    let ds = grid_dataset(&model);
    let one = k_coverage(&model, &ds, 1, DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!((one.numerator, one.denominator), (uint(15), uint(18)));
    let two = k_coverage(&model, &ds, 2, DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(
        (two.numerator.clone(), two.denominator.clone()),
        (uint(18), uint(108))
    );
    assert_eq!(two.ratio(), ratio(1, 6));

    finish(
        "criterion 2 (k-projection regression)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_3_denominator_scaling() {
    let start = Instant::now();

    let text: String = (0..20)
        .map(|i| format!("category c{i}: 0, 1, 2\n"))
        .collect();
    let model = parse_model(&text).unwrap();

    // k = n goes through the closed form; enumerating 3^20 cells would blow
    // the runtime budget by orders of magnitude
    let full = k_denominator(&model, 20, DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(full, uint(3_486_784_401));

    // 190 planes of 9 unit cells
    assert_eq!(
        k_denominator(&model, 2, DEFAULT_ENUM_LIMIT).unwrap(),
        uint(1_710)
    );

    // k = 3: 1140 planes of 3^3 = 27 unit cells each. (Reusing the 3^2
    // cells-per-plane of k = 2 here would give 1140 * 9 = 10260; the
    // per-plane cell count at k = 3 is 27.)
    assert_eq!(
        k_denominator(&model, 3, DEFAULT_ENUM_LIMIT).unwrap(),
        uint(30_780)
    );

    finish(
        "criterion 3 (denominator scaling)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_4_one_projection_completion() {
    let start = Instant::now();

    let model =
        parse_model("category c1: 0, 1\ncategory c2: 0, 1\ncategory c3: 0, 1\ncategory c4: 0, 1\n")
            .unwrap();
    let parsed = parse_dataset(
        "c1,c2,c3,c4\n0,0,1,1\n1,0,0,0\n1,0,0,1\n",
        &model,
        OnViolation::Reject,
    )
    .unwrap();
    let ds = parsed.dataset;

    // 1-projection book-keeping
    let tables1 = ProjectionTables::build(&model, &ds, 1);
    let expected1: [[u64; 2]; 4] = [[1, 2], [3, 0], [2, 1], [1, 2]];
    for (pos, row) in expected1.iter().enumerate() {
        for (v, &count) in row.iter().enumerate() {
            assert_eq!(tables1.count(pos, &Cell(vec![v])), count);
        }
    }

    // 2-projection book-keeping, planes in lexicographic order
    let tables2 = ProjectionTables::build(&model, &ds, 2);
    let expected2: [[u64; 4]; 6] = [
        [1, 0, 2, 0],
        [0, 1, 2, 0],
        [0, 1, 1, 1],
        [2, 1, 0, 0],
        [1, 2, 0, 0],
        [1, 1, 0, 1],
    ];
    let cells = [
        Cell(vec![0, 0]),
        Cell(vec![0, 1]),
        Cell(vec![1, 0]),
        Cell(vec![1, 1]),
    ];
    for (pos, row) in expected2.iter().enumerate() {
        for (cell, &count) in cells.iter().zip(row) {
            assert_eq!(tables2.count(pos, cell), count);
        }
    }

    // completing 1-projection needs exactly the single point (0,1,0,0)
    let points = minimum_one_projection(&tables1, &model).unwrap();
    assert_eq!(points, vec![CategorizationPoint(vec![0, 1, 0, 0])]);

    let mut extended = ds;
    for p in points {
        extended.insert(&model, p, 1).unwrap();
    }
    let cov = k_coverage(&model, &extended, 1, DEFAULT_ENUM_LIMIT).unwrap();
    assert!(cov.is_full());
    assert_eq!(cov.ratio(), BigRational::from_integer(1.into()));

    finish(
        "criterion 4 (1-projection completion)",
        start,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_5_ilp_encoding() {
    let start = Instant::now();

    let model =
        parse_model("category c1: 0, 1\ncategory c2: 0, 1\ncategory c3: 0, 1\ncategory c4: 0, 1\n")
            .unwrap();
    let parsed = parse_dataset(
        "c1,c2,c3,c4\n0,0,1,1\n1,0,0,0\n1,0,0,1\n",
        &model,
        OnViolation::Reject,
    )
    .unwrap();
    let tables = ProjectionTables::build(&model, &parsed.dataset, 2);

    let encoding = projcov::encode_next_point(&tables, &model).unwrap();
    assert_eq!(
        encoding.occ_count(),
        10,
        "one occupancy variable per empty cell"
    );

    // the linking row for cell (c1=0, c2=1): 0 <= var + var - 2 occ <= 1
    let occ_idx = encoding
        .improvable_cells()
        .iter()
        .position(|(pos, cell)| *pos == 0 && cell.values() == [0, 1])
        .unwrap();
    let expected_terms = [
        (encoding.value_var(0, 0), 1i64),
        (encoding.value_var(1, 1), 1i64),
        (encoding.occ_var(occ_idx), -2i64),
    ];
    assert!(encoding
        .problem
        .constraints()
        .iter()
        .any(|c| c.lo == Some(0) && c.hi == Some(1) && c.terms() == expected_terms));

    // solving it covers five new cells, digit for digit what exhaustive
    // candidate scoring finds
    let solution = solve(&encoding.problem);
    let IlpSolution::Optimal {
        assignment,
        objective,
    } = &solution
    else {
        panic!("expected an optimum");
    };
    assert!(check(&encoding.problem, assignment));
    assert_eq!(*objective, 5);

    let (_, brute) = brute_force_next_point(&model, &parsed.dataset, 2)
        .unwrap()
        .unwrap();
    assert_eq!(brute, 5);
    let (_, via_solver) = next_best_point(&tables, &model).unwrap();
    assert_eq!(via_solver, 5);

    finish("criterion 5 (ILP encoding)", start, Duration::from_secs(1));
}

#[test]
fn criterion_6_case_study_end_to_end() {
    let start = Instant::now();
    let model = driving_model();

    // (a) the impossible lane combination is reported infeasible
    let cov = k_coverage(&model, &DataSet::new(), 2, DEFAULT_ENUM_LIMIT).unwrap();
    let lanes = model.category_index("total_lanes").unwrap();
    let lane = model.category_index("current_lane").unwrap();
    assert_eq!(cov.infeasible_cells.len(), 1);
    let (delta, cell) = &cov.infeasible_cells[0];
    assert_eq!(delta.categories(), &[lanes, lane]);
    assert_eq!(cell.label(&model, delta), "total_lanes=1,current_lane=2");
    let partial = PartialAssignment::new(&model, &[(lanes, 0), (lane, 1)]).unwrap();
    assert!(!satisfiable_under(&model, &partial));

    // (b) 70 pair cells minus the one impossible cell
    assert_eq!(cov.coverable_cells, uint(69));
    assert_eq!(cov.denominator, uint(69));

    // (c) a greedy run from nothing reaches full coverage in few points,
    // with strictly increasing numerators
    let trace =
        achieve_full_coverage(&model, &DataSet::new(), 2, 1_000, DEFAULT_ENUM_LIMIT).unwrap();
    assert_eq!(trace.reason, StopReason::FullCoverage);
    assert!(
        trace.steps.len() >= 5,
        "69 cells over 15 planes per point need at least 5"
    );
    assert!(
        trace.steps.len() <= 10,
        "greedy run took {}",
        trace.steps.len()
    );
    let mut last = trace.initial_numerator.clone();
    for step in &trace.steps {
        assert!(step.numerator > last);
        assert!(point_satisfies(model.constraints(), &step.point));
        last = step.numerator.clone();
    }
    assert_eq!(trace.final_ratio(), BigRational::from_integer(1.into()));

    // the rendered pair tables mark the impossible cell with X
    let generated: Vec<CategorizationPoint> = trace.points().cloned().collect();
    let text = write_tables(&model, &generated, 2, DEFAULT_ENUM_LIMIT).unwrap();
    let plane = text
        .split("plane: ")
        .find(|s| s.starts_with("total_lanes,current_lane"))
        .expect("pair table present");
    assert!(plane.contains('X'));

    finish(
        "criterion 6 (case-study end to end)",
        start,
        Duration::from_secs(5),
    );
}

// --- randomised suites -----------------------------------------------------

struct RandomModel {
    model: CategorizationModel,
    dataset: DataSet,
}

fn random_instance(rng: &mut StdRng) -> RandomModel {
    let n = rng.gen_range(1..=5);
    let mut text = String::new();
    match rng.gen_range(0..3) {
        0 => text.push_str("combine: sum\n"),
        1 => text.push_str("combine: product\n"),
        _ => text.push_str("combine: max\n"),
    }
    let mut sizes = Vec::new();
    for i in 0..n {
        let m = rng.gen_range(1..=3);
        sizes.push(m);
        let values: Vec<String> = (0..m).map(|j| format!("v{j}")).collect();
        text.push_str(&format!("category c{i}: {}\n", values.join(", ")));
        let weights: Vec<String> = (0..m)
            .map(|_| rng.gen_range(0..=2u32).to_string())
            .collect();
        text.push_str(&format!("weights c{i}: {}\n", weights.join(", ")));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let lits = rng.gen_range(1..=3);
        let clause: Vec<String> = (0..lits)
            .map(|_| {
                let cat = rng.gen_range(0..n);
                let value = rng.gen_range(0..sizes[cat]);
                let op = if rng.gen_bool(0.5) { "=" } else { "!=" };
                format!("c{cat} {op} v{value}")
            })
            .collect();
        text.push_str(&format!("constraint: {}\n", clause.join(" | ")));
    }
    let model = parse_model(&text).unwrap();

    let mut dataset = DataSet::new();
    for _ in 0..rng.gen_range(0..=8) {
        let point = CategorizationPoint(
            (0..model.len())
                .map(|i| rng.gen_range(0..model.domain_size(i)))
                .collect(),
        );
        // only constraint-satisfying points are admissible
        let _ = dataset.insert(&model, point, 1);
    }
    RandomModel { model, dataset }
}

fn random_satisfying_point(
    rng: &mut StdRng,
    model: &CategorizationModel,
) -> Option<CategorizationPoint> {
    let all: Vec<CategorizationPoint> = enumerate_satisfying(model, DEFAULT_ENUM_LIMIT)
        .unwrap()
        .collect();
    if all.is_empty() {
        return None;
    }
    Some(all[rng.gen_range(0..all.len())].clone())
}

#[test]
fn criterion_7_randomised_suites() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_c0de);
    let rounds = 200;

    for round in 0..rounds {
        let RandomModel { model, mut dataset } = random_instance(&mut rng);
        let n = model.len();

        // (a) n-projection coverage coincides with whole-space coverage
        let proj = k_coverage(&model, &dataset, n, DEFAULT_ENUM_LIMIT).unwrap();
        let full = full_coverage(&model, &dataset, DEFAULT_ENUM_LIMIT).unwrap();
        assert_eq!(proj.numerator, full.numerator, "round {round}");
        assert_eq!(proj.denominator, full.denominator, "round {round}");
        assert!(proj.numerator <= proj.denominator || proj.vacuous);

        // (b) solver objective agrees with exhaustive candidate scoring
        let k = rng.gen_range(1..=n);
        let tables = ProjectionTables::build(&model, &dataset, k);
        let solver_objective = next_best_point(&tables, &model)
            .map(|(point, obj)| {
                assert!(
                    point_satisfies(model.constraints(), &point),
                    "round {round}"
                );
                obj
            })
            .unwrap_or(0);
        let brute_objective = brute_force_next_point(&model, &dataset, k)
            .unwrap()
            .map(|(_, obj)| obj)
            .unwrap_or(0);
        assert_eq!(solver_objective, brute_objective, "round {round} k={k}");

        // (c) occupation checks agree with exhaustive extension search
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            if rng.gen_bool(0.5) {
                pairs.push((i, rng.gen_range(0..model.domain_size(i))));
            }
        }
        let partial = PartialAssignment::new(&model, &pairs).unwrap();
        let oracle = enumerate_satisfying(&model, DEFAULT_ENUM_LIMIT)
            .unwrap()
            .any(|p| pairs.iter().all(|&(c, v)| p.values()[c] == v));
        assert_eq!(satisfiable_under(&model, &partial), oracle, "round {round}");

        // (d) coverage numerator is monotone under data growth
        if let Some(point) = random_satisfying_point(&mut rng, &model) {
            let before = k_coverage(&model, &dataset, k, DEFAULT_ENUM_LIMIT).unwrap();
            dataset.insert(&model, point, 1).unwrap();
            let after = k_coverage(&model, &dataset, k, DEFAULT_ENUM_LIMIT).unwrap();
            assert!(after.numerator >= before.numerator, "round {round}");
            assert_eq!(after.denominator, before.denominator, "round {round}");
        }
    }

    // (e) branch and bound equals exhaustive enumeration
    for round in 0..rounds {
        let vars = rng.gen_range(1..=18);
        let mut problem = projcov::IlpProblem::new();
        for i in 0..vars {
            let v = problem.add_var(format!("x{i}"));
            problem.set_objective(v, rng.gen_range(-5..=5));
        }
        for _ in 0..rng.gen_range(0..=5) {
            let mut terms: Vec<(usize, i64)> = Vec::new();
            for v in 0..vars {
                if rng.gen_bool(0.4) {
                    terms.push((v, rng.gen_range(-3..=3)));
                }
            }
            let a = rng.gen_range(-6..=6);
            let b = rng.gen_range(-6..=6);
            let lo = if rng.gen_bool(0.25) {
                None
            } else {
                Some(a.min(b))
            };
            let hi = if lo.is_some() && rng.gen_bool(0.25) {
                None
            } else {
                Some(a.max(b))
            };
            problem.add_constraint(&terms, lo, hi).unwrap();
        }
        let solved = solve(&problem).objective();
        let exhaustive = {
            let mut best: Option<i64> = None;
            for bits in 0u64..(1 << vars) {
                let assignment: Vec<bool> = (0..vars).map(|i| bits >> i & 1 == 1).collect();
                if check(&problem, &assignment) {
                    let value = problem.objective_value(&assignment);
                    best = Some(best.map_or(value, |b: i64| b.max(value)));
                }
            }
            best
        };
        assert_eq!(solved, exhaustive, "round {round} vars={vars}");
        // identical problems return identical assignments
        assert_eq!(solve(&problem), solve(&problem));
        let unpruned = projcov::solve_with(
            &problem,
            SolveOptions {
                bound_pruning: false,
                propagation: false,
            },
        );
        assert_eq!(
            unpruned.objective(),
            solved,
            "round {round} pruning soundness"
        );
    }

    // the weighted-models invariant rides along: unit weights count points
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20 {
        let RandomModel { model, .. } = random_instance(&mut rng);
        if model.combine_op() != projcov::CombineOp::Product {
            continue;
        }
        let unit = parse_model(
            &projcov::serialize_model(&model)
                .lines()
                .filter(|l| !l.starts_with("weights"))
                .map(|l| format!("{l}\n"))
                .collect::<String>(),
        )
        .unwrap();
        let count = count_weighted_models(&unit, DEFAULT_ENUM_LIMIT).unwrap();
        let points = enumerate_satisfying(&unit, DEFAULT_ENUM_LIMIT)
            .unwrap()
            .count();
        assert_eq!(count, uint(points as u64));
    }

    finish(
        "criterion 7 (randomised suites)",
        start,
        Duration::from_secs(60),
    );
}
