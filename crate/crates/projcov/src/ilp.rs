//! Exact 0-1 integer linear programming by depth-first branch and bound.
//!
//! Instances here are small (a few hundred binary variables), so the solver
//! skips LP relaxation entirely: the optimistic bound is the sum of positive
//! remaining objective coefficients over variables that interval propagation
//! still allows, and infeasibility is detected by propagating achievable
//! constraint intervals to a fixpoint. Branching is fixed (lowest-index
//! undecided variable, trying 1 before 0 when its objective coefficient is
//! positive) and the incumbent is only replaced on strict improvement, so
//! identical problems always return the identical optimal assignment.

use std::fmt::Write as _;

use thiserror::Error;

/// One two-sided linear constraint `lo <= sum(coeff * var) <= hi`.
/// A missing bound leaves that side unconstrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    terms: Vec<(usize, i64)>,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IlpError {
    #[error("constraint bounds are crossed: lo {lo} > hi {hi}")]
    CrossedBounds { lo: i64, hi: i64 },
    #[error("constraint references variable {var} but the problem has {vars} variables")]
    UnknownVariable { var: usize, vars: usize },
}

impl LinearConstraint {
    /// Build from `(variable, coefficient)` terms; duplicate variables are
    /// merged, zero coefficients dropped.
    pub fn new(terms: &[(usize, i64)], lo: Option<i64>, hi: Option<i64>) -> Result<Self, IlpError> {
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo > hi {
                return Err(IlpError::CrossedBounds { lo, hi });
            }
        }
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        let mut sorted = terms.to_vec();
        sorted.sort_by_key(|&(v, _)| v);
        for (var, coeff) in sorted {
            match merged.last_mut() {
                Some((last, acc)) if *last == var => *acc += coeff,
                _ => merged.push((var, coeff)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        Ok(LinearConstraint {
            terms: merged,
            lo,
            hi,
        })
    }

    pub fn equality(terms: &[(usize, i64)], value: i64) -> Result<Self, IlpError> {
        LinearConstraint::new(terms, Some(value), Some(value))
    }

    pub fn terms(&self) -> &[(usize, i64)] {
        &self.terms
    }

    /// Dense coefficient vector over `num_vars` variables.
    pub fn coefficients(&self, num_vars: usize) -> Vec<i64> {
        let mut coeffs = vec![0; num_vars];
        for &(var, coeff) in &self.terms {
            coeffs[var] = coeff;
        }
        coeffs
    }

    pub fn evaluate(&self, assignment: &[bool]) -> i64 {
        self.terms
            .iter()
            .map(|&(var, coeff)| if assignment[var] { coeff } else { 0 })
            .sum()
    }

    pub fn holds(&self, assignment: &[bool]) -> bool {
        let value = self.evaluate(assignment);
        self.lo.is_none_or(|lo| value >= lo) && self.hi.is_none_or(|hi| value <= hi)
    }
}

/// A 0-1 maximisation problem: named binary variables, two-sided linear
/// constraints, and an integer objective vector.
#[derive(Debug, Clone, Default)]
pub struct IlpProblem {
    names: Vec<String>,
    objective: Vec<i64>,
    constraints: Vec<LinearConstraint>,
}

impl IlpProblem {
    pub fn new() -> Self {
        IlpProblem::default()
    }

    /// Add a binary variable with objective coefficient 0; returns its index.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.objective.push(0);
        self.names.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coeff: i64) {
        self.objective[var] = coeff;
    }

    pub fn add_constraint(
        &mut self,
        terms: &[(usize, i64)],
        lo: Option<i64>,
        hi: Option<i64>,
    ) -> Result<usize, IlpError> {
        let constraint = LinearConstraint::new(terms, lo, hi)?;
        if let Some(&(var, _)) = constraint.terms().last() {
            if var >= self.names.len() {
                return Err(IlpError::UnknownVariable {
                    var,
                    vars: self.names.len(),
                });
            }
        }
        self.constraints.push(constraint);
        Ok(self.constraints.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn objective(&self) -> &[i64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objective_value(&self, assignment: &[bool]) -> i64 {
        self.objective
            .iter()
            .zip(assignment)
            .map(|(&c, &v)| if v { c } else { 0 })
            .sum()
    }

    /// Dump in LP text format, for cross-checking against external solvers.
    /// Variables are renamed `x0..xN`; the original names appear as comments.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            let _ = writeln!(out, "\\ x{i} = {name}");
        }
        out.push_str("Maximize\n obj:");
        let mut first = true;
        for (i, &c) in self.objective.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let _ = write!(out, " {sign} {} x{i}", c.abs());
            first = false;
        }
        if first {
            out.push_str(" 0 x0");
        }
        out.push_str("\nSubject To\n");
        for (ci, constraint) in self.constraints.iter().enumerate() {
            let mut lhs = String::new();
            let mut first = true;
            for &(var, coeff) in constraint.terms() {
                let sign = if coeff < 0 {
                    "-"
                } else if first {
                    ""
                } else {
                    "+"
                };
                let _ = write!(lhs, " {sign} {} x{var}", coeff.abs());
                first = false;
            }
            if first {
                lhs.push_str(" 0 x0");
            }
            match (constraint.lo, constraint.hi) {
                (Some(lo), Some(hi)) if lo == hi => {
                    let _ = writeln!(out, " c{ci}:{lhs} = {lo}");
                }
                (lo, hi) => {
                    if let Some(lo) = lo {
                        let _ = writeln!(out, " c{ci}l:{lhs} >= {lo}");
                    }
                    if let Some(hi) = hi {
                        let _ = writeln!(out, " c{ci}u:{lhs} <= {hi}");
                    }
                }
            }
        }
        out.push_str("Binary\n");
        for i in 0..self.names.len() {
            let _ = writeln!(out, " x{i}");
        }
        out.push_str("End\n");
        out
    }
}

/// Result of a solve: a proved optimum or a proof of infeasibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IlpSolution {
    Optimal {
        assignment: Vec<bool>,
        objective: i64,
    },
    Infeasible,
}

impl IlpSolution {
    pub fn objective(&self) -> Option<i64> {
        match self {
            IlpSolution::Optimal { objective, .. } => Some(*objective),
            IlpSolution::Infeasible => None,
        }
    }
}

/// Search switches; disabling both degrades the solver to exhaustive
/// enumeration (used to validate pruning soundness).
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub bound_pruning: bool,
    pub propagation: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bound_pruning: true,
            propagation: true,
        }
    }
}

/// True iff every constraint holds under the assignment.
pub fn check(problem: &IlpProblem, assignment: &[bool]) -> bool {
    assert_eq!(
        assignment.len(),
        problem.num_vars(),
        "assignment length mismatch"
    );
    problem.constraints().iter().all(|c| c.holds(assignment))
}

pub fn solve(problem: &IlpProblem) -> IlpSolution {
    solve_with(problem, SolveOptions::default())
}

/// Allowed values of one variable during search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Domain {
    can_zero: bool,
    can_one: bool,
}

impl Domain {
    const BOTH: Domain = Domain {
        can_zero: true,
        can_one: true,
    };

    fn fixed(self) -> Option<bool> {
        match (self.can_zero, self.can_one) {
            (true, false) => Some(false),
            (false, true) => Some(true),
            _ => None,
        }
    }

    fn empty(self) -> bool {
        !self.can_zero && !self.can_one
    }

    fn min_term(self, coeff: i64) -> i64 {
        match self.fixed() {
            Some(true) => coeff,
            Some(false) => 0,
            None => coeff.min(0),
        }
    }

    fn max_term(self, coeff: i64) -> i64 {
        match self.fixed() {
            Some(true) => coeff,
            Some(false) => 0,
            None => coeff.max(0),
        }
    }
}

struct Search<'a> {
    problem: &'a IlpProblem,
    options: SolveOptions,
    /// constraints watching each variable
    watchers: Vec<Vec<usize>>,
    incumbent: Option<(Vec<bool>, i64)>,
}

pub fn solve_with(problem: &IlpProblem, options: SolveOptions) -> IlpSolution {
    let mut watchers = vec![Vec::new(); problem.num_vars()];
    for (ci, constraint) in problem.constraints().iter().enumerate() {
        for &(var, _) in constraint.terms() {
            watchers[var].push(ci);
        }
    }
    let mut search = Search {
        problem,
        options,
        watchers,
        incumbent: None,
    };
    let mut domains = vec![Domain::BOTH; problem.num_vars()];
    search.dfs(&mut domains);
    match search.incumbent {
        Some((assignment, objective)) => IlpSolution::Optimal {
            assignment,
            objective,
        },
        None => IlpSolution::Infeasible,
    }
}

impl<'a> Search<'a> {
    /// Achievable interval of one constraint under current domains.
    fn interval(&self, constraint: &LinearConstraint, domains: &[Domain]) -> (i64, i64) {
        let mut min = 0;
        let mut max = 0;
        for &(var, coeff) in constraint.terms() {
            min += domains[var].min_term(coeff);
            max += domains[var].max_term(coeff);
        }
        (min, max)
    }

    /// Narrow domains to a fixpoint: remove any value whose choice would
    /// empty some constraint's achievable interval. Returns false on wipeout.
    fn propagate(&self, domains: &mut [Domain]) -> bool {
        let mut queue: Vec<usize> = (0..self.problem.constraints().len()).collect();
        while let Some(ci) = queue.pop() {
            let constraint = &self.problem.constraints()[ci];
            // each narrowing invalidates the interval, so re-derive it until
            // this constraint reaches its own fixpoint
            'restart: loop {
                let (min, max) = self.interval(constraint, domains);
                if constraint.lo.is_some_and(|lo| max < lo)
                    || constraint.hi.is_some_and(|hi| min > hi)
                {
                    return false;
                }
                for &(var, coeff) in constraint.terms() {
                    let domain = domains[var];
                    if domain.fixed().is_some() {
                        continue;
                    }
                    // interval with var pinned to each value
                    let min_rest = min - domain.min_term(coeff);
                    let max_rest = max - domain.max_term(coeff);
                    let mut narrowed = domain;
                    for value in [false, true] {
                        let term = if value { coeff } else { 0 };
                        let dead = constraint.lo.is_some_and(|lo| max_rest + term < lo)
                            || constraint.hi.is_some_and(|hi| min_rest + term > hi);
                        if dead {
                            if value {
                                narrowed.can_one = false;
                            } else {
                                narrowed.can_zero = false;
                            }
                        }
                    }
                    if narrowed != domain {
                        if narrowed.empty() {
                            return false;
                        }
                        domains[var] = narrowed;
                        for &watcher in &self.watchers[var] {
                            if watcher != ci && !queue.contains(&watcher) {
                                queue.push(watcher);
                            }
                        }
                        continue 'restart;
                    }
                }
                break;
            }
        }
        true
    }

    /// Best objective still reachable: fixed contributions plus every
    /// positive coefficient whose variable can still take value 1.
    fn optimistic_bound(&self, domains: &[Domain]) -> i64 {
        self.problem
            .objective()
            .iter()
            .zip(domains)
            .map(|(&coeff, domain)| domain.max_term(coeff))
            .sum()
    }

    fn dfs(&mut self, domains: &mut Vec<Domain>) {
        if self.options.propagation {
            if !self.propagate(domains) {
                return;
            }
        } else if domains.iter().all(|d| d.fixed().is_some()) {
            // exhaustive mode: feasibility is only decided at leaves
            let assignment: Vec<bool> = domains.iter().map(|d| d.fixed().unwrap()).collect();
            if !check(self.problem, &assignment) {
                return;
            }
        }
        if self.options.bound_pruning {
            if let Some((_, best)) = &self.incumbent {
                if self.optimistic_bound(domains) <= *best {
                    return;
                }
            }
        }
        let branch_var = domains.iter().position(|d| d.fixed().is_none());
        let Some(var) = branch_var else {
            let assignment: Vec<bool> = domains.iter().map(|d| d.fixed().unwrap()).collect();
            if self.options.propagation {
                debug_assert!(check(self.problem, &assignment));
            } else if !check(self.problem, &assignment) {
                return;
            }
            let objective = self.problem.objective_value(&assignment);
            let improves = self
                .incumbent
                .as_ref()
                .is_none_or(|(_, best)| objective > *best);
            if improves {
                self.incumbent = Some((assignment, objective));
            }
            return;
        };
        let try_one_first = self.problem.objective()[var] > 0;
        let order = if try_one_first {
            [true, false]
        } else {
            [false, true]
        };
        for value in order {
            let saved = domains.clone();
            domains[var] = if value {
                Domain {
                    can_zero: false,
                    can_one: true,
                }
            } else {
                Domain {
                    can_zero: true,
                    can_one: false,
                }
            };
            self.dfs(domains);
            *domains = saved;
        }
    }
}
