//! Quantitative projection coverage for discrete scenario spaces.
//!
//! A scenario space is described by a [`CategorizationModel`]: ordered
//! categories with finite value domains, a non-negative weight per value, a
//! combine operator, and a CNF constraint set ruling out meaningless value
//! combinations. A [`DataSet`] is a multiset of points in that space.
//!
//! The crate computes two exact coverage metrics, whole-space coverage and
//! `k`-projection coverage, where the data set is measured on every
//! projection onto `k` of the categories, and generates new points that
//! drive `k`-projection coverage to 100%, either by direct table completion
//! (`k = 1`, unconstrained) or by repeatedly solving a small 0-1 integer
//! program for the point that covers the most still-missing cells.
//!
//! All coverage arithmetic uses big integers and exact rationals; results
//! are reproducible bit for bit. See the `book/` directory for a guided
//! tour, and the `projcov` command-line tool for file-based workflows.
//!
//! ```
//! use projcov::{parse_model, parse_dataset, k_coverage, OnViolation, DEFAULT_ENUM_LIMIT};
//!
//! let model = parse_model("category speed: slow, fast\ncategory road: dry, wet\n")?;
//! let data = parse_dataset("speed,road\nslow,dry\nfast,wet\n", &model, OnViolation::Reject)?;
//! let cov = k_coverage(&model, &data.dataset, 1, DEFAULT_ENUM_LIMIT)?;
//! assert_eq!(cov.numerator, 4u32.into());
//! assert_eq!(cov.denominator, 4u32.into());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod coverage;
pub mod format;
pub mod generate;
pub mod ilp;
pub mod model;
pub mod report;
pub mod sat;

pub use coverage::{
    all_projections, cell_weight, coverage_from_tables, delta_cells, full_coverage, k_coverage,
    k_denominator, project, Cell, CoverageError, CoverageResult, CoverageScope, FeasibilityCache,
    ProjectionIndex, ProjectionShare, ProjectionTables,
};
pub use format::{
    parse_dataset, parse_model, serialize_model, write_points, DatasetParse, DroppedRow,
    OnViolation, ParseError,
};
pub use generate::{
    achieve_full_coverage, brute_force_next_point, encode_next_point, minimum_one_projection,
    next_best_point, one_projection_trace, GenerateError, GenerationTrace, NextPointEncoding,
    StopReason, TraceStep,
};
pub use ilp::{check, solve, solve_with, IlpProblem, IlpSolution, LinearConstraint, SolveOptions};
pub use model::{
    combine_weights, point_satisfies, validate_point, CategorizationModel, CategorizationPoint,
    Category, Clause, CombineOp, ConstraintSet, DataSet, Literal, LiteralOp, ModelError,
    PointViolation,
};
pub use report::{report_json, trace_json, write_report, write_tables, write_trace};
pub use sat::{
    count_weighted_models, enumerate_satisfying, satisfiable_under, PartialAssignment, SpaceError,
    DEFAULT_ENUM_LIMIT,
};

// The guide's code blocks double as doctests so the book can never drift
// from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/models.md")]
    pub struct Models;
    #[doc = include_str!("../../../book/src/coverage.md")]
    pub struct Coverage;
    #[doc = include_str!("../../../book/src/generation.md")]
    pub struct Generation;
    #[doc = include_str!("../../../book/src/solver.md")]
    pub struct Solver;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
