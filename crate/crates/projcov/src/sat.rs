//! Satisfiability and exact weighted model counting over the multi-valued
//! CNF constraints.
//!
//! Domains here are tiny (a handful of values per category), so the solver is
//! a plain backtracking search: assign categories in ascending order, values
//! in ascending order, and prune any branch under which some clause has every
//! literal already false. That is enough to make occupation checks for
//! projected cells and full-space enumeration exact and deterministic. Each
//! entry point builds its own search state, so concurrent calls never share
//! anything.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::model::{
    big_zero, CategorizationModel, CategorizationPoint, Clause, ConstraintSet, LiteralOp,
};

/// Default cap on the number of full assignments an exact enumeration may
/// visit. Exact full-space counting is opt-in for big models.
pub const DEFAULT_ENUM_LIMIT: u64 = 10_000_000;

/// Values fixed for a subset of categories; the remaining categories are
/// free. This is what an occupation check receives: a projected cell with
/// its categories pinned.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    fixed: BTreeMap<usize, usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartialAssignmentError {
    #[error("category index {0} out of range")]
    CategoryOutOfRange(usize),
    #[error("value index {value} out of range for category index {category}")]
    ValueOutOfRange { category: usize, value: usize },
    #[error("category index {0} assigned twice")]
    DuplicateCategory(usize),
}

impl PartialAssignment {
    pub fn empty() -> Self {
        PartialAssignment::default()
    }

    /// Build from `(category, value)` pairs, validating against the model.
    pub fn new(
        model: &CategorizationModel,
        pairs: &[(usize, usize)],
    ) -> Result<Self, PartialAssignmentError> {
        let mut fixed = BTreeMap::new();
        for &(category, value) in pairs {
            if category >= model.len() {
                return Err(PartialAssignmentError::CategoryOutOfRange(category));
            }
            if value >= model.domain_size(category) {
                return Err(PartialAssignmentError::ValueOutOfRange { category, value });
            }
            if fixed.insert(category, value).is_some() {
                return Err(PartialAssignmentError::DuplicateCategory(category));
            }
        }
        Ok(PartialAssignment { fixed })
    }

    pub fn get(&self, category: usize) -> Option<usize> {
        self.fixed.get(&category).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.fixed.iter().map(|(&c, &v)| (c, v))
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }
}

/// Clause state under a partial assignment.
enum ClauseState {
    Satisfied,
    /// Every literal decided and false.
    Dead,
    Open,
}

fn clause_state(clause: &Clause, assign: &[Option<usize>]) -> ClauseState {
    let mut open = false;
    for lit in clause.literals() {
        match assign[lit.category] {
            Some(v) => {
                let holds = match lit.op {
                    LiteralOp::Eq => v == lit.value,
                    LiteralOp::Neq => v != lit.value,
                };
                if holds {
                    return ClauseState::Satisfied;
                }
            }
            None => open = true,
        }
    }
    if open {
        ClauseState::Open
    } else {
        ClauseState::Dead
    }
}

/// No clause is dead under the partial assignment.
fn prefix_viable(cs: &ConstraintSet, assign: &[Option<usize>]) -> bool {
    !cs.clauses
        .iter()
        .any(|c| matches!(clause_state(c, assign), ClauseState::Dead))
}

/// All clauses already satisfied, so any extension works.
fn all_satisfied(cs: &ConstraintSet, assign: &[Option<usize>]) -> bool {
    cs.clauses
        .iter()
        .all(|c| matches!(clause_state(c, assign), ClauseState::Satisfied))
}

/// True iff some full point extends `partial` and satisfies the model's
/// constraint set. Exact and deterministic.
pub fn satisfiable_under(model: &CategorizationModel, partial: &PartialAssignment) -> bool {
    let mut assign: Vec<Option<usize>> = vec![None; model.len()];
    for (c, v) in partial.iter() {
        assign[c] = Some(v);
    }
    if !prefix_viable(model.constraints(), &assign) {
        return false;
    }
    extend(model, &mut assign)
}

fn extend(model: &CategorizationModel, assign: &mut Vec<Option<usize>>) -> bool {
    if all_satisfied(model.constraints(), assign) {
        return true;
    }
    // Some clause is still open, so an unassigned category exists.
    let Some(next) = assign.iter().position(Option::is_none) else {
        return false;
    };
    for v in 0..model.domain_size(next) {
        assign[next] = Some(v);
        if prefix_viable(model.constraints(), assign) && extend(model, assign) {
            assign[next] = None;
            return true;
        }
    }
    assign[next] = None;
    false
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("space too large for exact full-coverage denominator: {size} assignments exceed limit {limit}")]
    TooLarge { size: BigUint, limit: u64 },
}

fn check_space(model: &CategorizationModel, limit: u64) -> Result<(), SpaceError> {
    let size = model
        .categories()
        .iter()
        .fold(BigUint::one(), |acc, c| acc * BigUint::from(c.len()));
    if size > BigUint::from(limit) {
        return Err(SpaceError::TooLarge { size, limit });
    }
    Ok(())
}

/// Exact sum, over every constraint-satisfying full point, of the combined
/// weight of that point. This is the full-coverage denominator.
///
/// Refuses to run when the unconstrained space exceeds `limit`: the quantity
/// is #P-hard in general, so exact computation is gated on space size.
pub fn count_weighted_models(
    model: &CategorizationModel,
    limit: u64,
) -> Result<BigUint, SpaceError> {
    check_space(model, limit)?;
    let mut total = big_zero();
    for point in enumerate_satisfying(model, limit)? {
        total += model.point_weight(&point);
    }
    Ok(total)
}

/// All constraint-satisfying full points, in lexicographic order of value
/// indices.
pub fn enumerate_satisfying(
    model: &CategorizationModel,
    limit: u64,
) -> Result<SatisfyingPoints<'_>, SpaceError> {
    check_space(model, limit)?;
    Ok(SatisfyingPoints {
        model,
        stack: Vec::new(),
        state: IterState::Fresh,
    })
}

enum IterState {
    Fresh,
    /// The current stack was yielded; advance before descending again.
    Yielded,
    Done,
}

/// Backtracking iterator over satisfying points. The stack holds the chosen
/// value per category for a viable prefix.
pub struct SatisfyingPoints<'a> {
    model: &'a CategorizationModel,
    stack: Vec<usize>,
    state: IterState,
}

impl<'a> SatisfyingPoints<'a> {
    fn as_assign(&self) -> Vec<Option<usize>> {
        let mut assign = vec![None; self.model.len()];
        for (i, &v) in self.stack.iter().enumerate() {
            assign[i] = Some(v);
        }
        assign
    }

    fn prefix_ok(&self) -> bool {
        prefix_viable(self.model.constraints(), &self.as_assign())
    }

    /// Move to the next candidate prefix: increment the top of the stack,
    /// popping exhausted categories. Returns false when the search space is
    /// exhausted.
    fn advance(&mut self) -> bool {
        loop {
            match self.stack.pop() {
                None => return false,
                Some(v) => {
                    let depth = self.stack.len();
                    if v + 1 < self.model.domain_size(depth) {
                        self.stack.push(v + 1);
                        return true;
                    }
                }
            }
        }
    }
}

impl<'a> Iterator for SatisfyingPoints<'a> {
    type Item = CategorizationPoint;

    fn next(&mut self) -> Option<Self::Item> {
        let mut need_advance = match self.state {
            IterState::Done => return None,
            IterState::Fresh => false,
            IterState::Yielded => true,
        };
        self.state = IterState::Yielded;
        loop {
            if need_advance {
                if !self.advance() {
                    self.state = IterState::Done;
                    return None;
                }
            } else if self.stack.len() < self.model.len() {
                self.stack.push(0);
            }
            if self.prefix_ok() {
                if self.stack.len() == self.model.len() {
                    return Some(CategorizationPoint(self.stack.clone()));
                }
                need_advance = false;
            } else {
                need_advance = true;
            }
        }
    }
}
