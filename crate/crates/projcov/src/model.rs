//! Categorization models: the discrete scenario space a data set is measured
//! against.
//!
//! A model is an ordered list of categories, each with a finite value domain
//! and one non-negative integer weight per value. The weight of a value is the
//! number of data points that value is expected to attract; weights of
//! different categories combine under the model's [`CombineOp`]. A CNF
//! constraint set restricts which full value assignments describe physically
//! meaningful scenarios.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// How per-category weights combine into the weight of a tuple of values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Product,
    Max,
}

impl CombineOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CombineOp::Sum => "sum",
            CombineOp::Product => "product",
            CombineOp::Max => "max",
        }
    }
}

impl fmt::Display for CombineOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One category: a name, its ordered value labels, and one weight per value.
///
/// A weight of `0` marks a value whose cells are excluded from coverage
/// accounting entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub values: Vec<String>,
    pub weights: Vec<u64>,
}

impl Category {
    /// Category with all weights defaulting to 1.
    pub fn uniform(name: impl Into<String>, values: &[&str]) -> Self {
        Category {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
            weights: vec![1; values.len()],
        }
    }

    pub fn weighted(name: impl Into<String>, values: &[&str], weights: &[u64]) -> Self {
        Category {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
            weights: weights.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.values.iter().position(|v| v == label)
    }
}

/// Equality test on one category, possibly negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiteralOp {
    Eq,
    Neq,
}

/// One literal of a constraint clause: `category op value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub category: usize,
    pub op: LiteralOp,
    pub value: usize,
}

impl Literal {
    pub fn eq(category: usize, value: usize) -> Self {
        Literal {
            category,
            op: LiteralOp::Eq,
            value,
        }
    }

    pub fn neq(category: usize, value: usize) -> Self {
        Literal {
            category,
            op: LiteralOp::Neq,
            value,
        }
    }

    /// Truth value under a full assignment of one value per category.
    pub fn holds(&self, values: &[usize]) -> bool {
        match self.op {
            LiteralOp::Eq => values[self.category] == self.value,
            LiteralOp::Neq => values[self.category] != self.value,
        }
    }
}

/// A non-empty disjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }
}

/// A conjunction of clauses (CNF). Empty means unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    pub clauses: Vec<Clause>,
}

impl ConstraintSet {
    pub fn empty() -> Self {
        ConstraintSet {
            clauses: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }
}

/// One full scenario description: one value index per category, in model
/// order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategorizationPoint(pub Vec<usize>);

impl CategorizationPoint {
    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for CategorizationPoint {
    fn from(values: Vec<usize>) -> Self {
        CategorizationPoint(values)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model must declare at least one category")]
    NoCategories,
    #[error("duplicate category name `{0}`")]
    DuplicateCategory(String),
    #[error("category `{0}` has no values")]
    EmptyDomain(String),
    #[error("category `{category}` repeats value label `{value}`")]
    DuplicateValue { category: String, value: String },
    #[error("category `{category}` has {values} values but {weights} weights")]
    WeightCountMismatch {
        category: String,
        values: usize,
        weights: usize,
    },
    #[error("constraint clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("constraint clause {clause} names category index {category} out of range")]
    LiteralCategoryOutOfRange { clause: usize, category: usize },
    #[error("constraint clause {clause} uses value index {value} out of range for category `{category}`")]
    LiteralValueOutOfRange {
        clause: usize,
        category: String,
        value: usize,
    },
}

/// The categorization space: categories, weights, combine operator, and
/// constraints. Immutable once constructed; construction validates every
/// structural invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorizationModel {
    categories: Vec<Category>,
    combine: CombineOp,
    constraints: ConstraintSet,
}

impl CategorizationModel {
    pub fn new(
        categories: Vec<Category>,
        combine: CombineOp,
        constraints: ConstraintSet,
    ) -> Result<Self, ModelError> {
        if categories.is_empty() {
            return Err(ModelError::NoCategories);
        }
        for (i, cat) in categories.iter().enumerate() {
            if categories[..i].iter().any(|c| c.name == cat.name) {
                return Err(ModelError::DuplicateCategory(cat.name.clone()));
            }
            if cat.values.is_empty() {
                return Err(ModelError::EmptyDomain(cat.name.clone()));
            }
            for (j, v) in cat.values.iter().enumerate() {
                if cat.values[..j].contains(v) {
                    return Err(ModelError::DuplicateValue {
                        category: cat.name.clone(),
                        value: v.clone(),
                    });
                }
            }
            if cat.weights.len() != cat.values.len() {
                return Err(ModelError::WeightCountMismatch {
                    category: cat.name.clone(),
                    values: cat.values.len(),
                    weights: cat.weights.len(),
                });
            }
        }
        for (ci, clause) in constraints.clauses.iter().enumerate() {
            if clause.0.is_empty() {
                return Err(ModelError::EmptyClause { clause: ci });
            }
            for lit in &clause.0 {
                let cat =
                    categories
                        .get(lit.category)
                        .ok_or(ModelError::LiteralCategoryOutOfRange {
                            clause: ci,
                            category: lit.category,
                        })?;
                if lit.value >= cat.values.len() {
                    return Err(ModelError::LiteralValueOutOfRange {
                        clause: ci,
                        category: cat.name.clone(),
                        value: lit.value,
                    });
                }
            }
        }
        Ok(CategorizationModel {
            categories,
            combine,
            constraints,
        })
    }

    /// Number of categories.
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, index: usize) -> &Category {
        &self.categories[index]
    }

    pub fn combine_op(&self) -> CombineOp {
        self.combine
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c.name == name)
    }

    /// Size of the domain of category `i`.
    pub fn domain_size(&self, index: usize) -> usize {
        self.categories[index].values.len()
    }

    /// Weight of value `value` of category `category`.
    pub fn weight(&self, category: usize, value: usize) -> u64 {
        self.categories[category].weights[value]
    }

    /// Total number of full assignments, ignoring constraints, or `None` on
    /// overflow.
    pub fn space_size(&self) -> Option<u64> {
        self.categories
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(c.values.len() as u64))
    }

    /// Combined weight of a full point under the model's operator.
    pub fn point_weight(&self, point: &CategorizationPoint) -> BigUint {
        let weights: Vec<u64> = point
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| self.weight(i, v))
            .collect();
        combine_weights(&weights, self.combine).expect("point is non-empty")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("empty weight combination")]
pub struct EmptyCombination;

/// Fold a non-empty list of weights under `op`.
pub fn combine_weights(weights: &[u64], op: CombineOp) -> Result<BigUint, EmptyCombination> {
    let mut iter = weights.iter().map(|&w| BigUint::from(w));
    let first = iter.next().ok_or(EmptyCombination)?;
    Ok(iter.fold(first, |acc, w| match op {
        CombineOp::Sum => acc + w,
        CombineOp::Product => acc * w,
        CombineOp::Max => acc.max(w),
    }))
}

/// True iff every clause of `cs` has at least one literal satisfied by the
/// full assignment in `point`.
pub fn point_satisfies(cs: &ConstraintSet, point: &CategorizationPoint) -> bool {
    cs.clauses
        .iter()
        .all(|clause| clause.0.iter().any(|lit| lit.holds(point.values())))
}

/// Why a point is not admissible for a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PointViolation {
    #[error("point has {got} values but the model has {expected} categories")]
    WrongArity { expected: usize, got: usize },
    #[error("value index {value} out of range for category `{category}` ({domain} values)")]
    ValueOutOfRange {
        category: String,
        value: usize,
        domain: usize,
    },
    #[error("point violates constraint clause {clause}: {rendered}")]
    UnsatisfiedClause { clause: usize, rendered: String },
}

/// Check a point against a model: arity, per-category bounds, then the
/// constraint set. Reports the first failure instead of aborting.
pub fn validate_point(
    model: &CategorizationModel,
    point: &CategorizationPoint,
) -> Result<(), PointViolation> {
    if point.len() != model.len() {
        return Err(PointViolation::WrongArity {
            expected: model.len(),
            got: point.len(),
        });
    }
    for (i, &v) in point.values().iter().enumerate() {
        let cat = model.category(i);
        if v >= cat.len() {
            return Err(PointViolation::ValueOutOfRange {
                category: cat.name.clone(),
                value: v,
                domain: cat.len(),
            });
        }
    }
    for (ci, clause) in model.constraints().clauses.iter().enumerate() {
        if !clause.0.iter().any(|lit| lit.holds(point.values())) {
            return Err(PointViolation::UnsatisfiedClause {
                clause: ci,
                rendered: render_clause(model, clause),
            });
        }
    }
    Ok(())
}

/// Human-readable form of a clause, e.g. `total_lanes != 1 | current_lane != 2`.
pub fn render_clause(model: &CategorizationModel, clause: &Clause) -> String {
    clause
        .0
        .iter()
        .map(|lit| {
            let cat = model.category(lit.category);
            let op = match lit.op {
                LiteralOp::Eq => "=",
                LiteralOp::Neq => "!=",
            };
            format!("{} {} {}", cat.name, op, cat.values[lit.value])
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

/// A multiset of categorization points. Every stored point is validated
/// against the model at insertion; a data set never holds points that
/// violate the constraint set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataSet {
    points: BTreeMap<CategorizationPoint, u64>,
    total: u64,
}

impl DataSet {
    pub fn new() -> Self {
        DataSet::default()
    }

    /// Add `multiplicity` copies of `point`, rejecting invalid points.
    pub fn insert(
        &mut self,
        model: &CategorizationModel,
        point: CategorizationPoint,
        multiplicity: u64,
    ) -> Result<(), PointViolation> {
        validate_point(model, &point)?;
        if multiplicity > 0 {
            *self.points.entry(point).or_insert(0) += multiplicity;
            self.total += multiplicity;
        }
        Ok(())
    }

    /// Number of data points, counting multiplicity.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn distinct(&self) -> usize {
        self.points.len()
    }

    pub fn multiplicity(&self, point: &CategorizationPoint) -> u64 {
        self.points.get(point).copied().unwrap_or(0)
    }

    /// Distinct points with their multiplicities, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&CategorizationPoint, u64)> {
        self.points.iter().map(|(p, &m)| (p, m))
    }
}

/// Zero as a big integer; shorthand used by the accounting code.
pub(crate) fn big_zero() -> BigUint {
    BigUint::zero()
}

pub(crate) fn big_one() -> BigUint {
    BigUint::one()
}
