//! Exhaustive reference solvers for small instances.

use crate::constraints::{Constraint, ConstraintKind};
use crate::error::{Error, Result};
use crate::sets;
use crate::solvers::RobustInstance;
use itertools::Itertools;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationBudget {
    pub max_ground_size: usize,
    pub max_feasible: u64,
    pub timeout: Option<Duration>,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_ground_size: 16,
            max_feasible: 10_000_000,
            timeout: Some(Duration::from_secs(60)),
        }
    }
}

/// Stream of every feasible set (sorted ascending), each exactly once.
///
/// Yields a single `Err(BudgetExceeded)` and then stops if the budget runs
/// out.
pub struct FeasibleSets<'a> {
    constraint: &'a Constraint,
    candidates: Box<dyn Iterator<Item = Vec<usize>> + 'a>,
    budget: EnumerationBudget,
    started: Instant,
    yielded: u64,
    steps: u64,
    done: bool,
}

impl Iterator for FeasibleSets<'_> {
    type Item = Result<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.steps += 1;
            if self.steps.is_multiple_of(1024) {
                if let Some(limit) = self.budget.timeout {
                    if self.started.elapsed() > limit {
                        self.done = true;
                        return Some(Err(Error::BudgetExceeded(format!("enumeration exceeded {limit:?}"))));
                    }
                }
            }
            let Some(set) = self.candidates.next() else {
                self.done = true;
                return None;
            };
            if !self.constraint.is_feasible(&set) {
                continue;
            }
            self.yielded += 1;
            if self.yielded > self.budget.max_feasible {
                self.done = true;
                return Some(Err(Error::BudgetExceeded(format!(
                    "more than {} feasible sets",
                    self.budget.max_feasible
                ))));
            }
            return Some(Ok(set));
        }
    }
}

/// Perfect matchings as permutations, when every (left, right) pair has at
/// most one edge.
fn matching_candidates(c: &Constraint) -> Option<Box<dyn Iterator<Item = Vec<usize>> + '_>> {
    let g = c.graph()?;
    let left = g.left_size()?;
    let mut cell = vec![vec![None; left]; left];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let (a, b) = if u < left { (u, v - left) } else { (v, u - left) };
        if cell[a][b].replace(e).is_some() {
            return None;
        }
    }
    Some(Box::new((0..left).permutations(left).filter_map(move |p| {
        let set: Option<Vec<usize>> = p.iter().enumerate().map(|(a, &b)| cell[a][b]).collect();
        set.map(|s| sets::canonical(&s))
    })))
}

pub fn enumerate_feasible(c: &Constraint, budget: EnumerationBudget) -> Result<FeasibleSets<'_>> {
    let n = c.n();
    if n > budget.max_ground_size {
        return Err(Error::BudgetExceeded(format!(
            "ground set of {n} exceeds the enumeration limit {}",
            budget.max_ground_size
        )));
    }
    let candidates: Box<dyn Iterator<Item = Vec<usize>>> = match c.kind() {
        ConstraintKind::PerfectBipartiteMatching(_) => match matching_candidates(c) {
            Some(it) => it,
            None => Box::new((0u64..1 << n).map(move |b| sets::from_bits(b, n))),
        },
        ConstraintKind::SpanningTree(g) => Box::new((0..n).combinations(g.vertices() - 1)),
        _ => Box::new((0u64..1 << n).map(move |b| sets::from_bits(b, n))),
    };
    Ok(FeasibleSets {
        constraint: c,
        candidates,
        budget,
        started: Instant::now(),
        yielded: 0,
        steps: 0,
        done: false,
    })
}

/// Global minimizer of `max_i f_i` over the constraint; ties go to the
/// lexicographically smallest set.
pub fn brute_force_min(inst: &RobustInstance, budget: EnumerationBudget) -> Result<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for set in enumerate_feasible(inst.constraint(), budget)? {
        let set = set?;
        let value = inst.value(&set);
        let better = match &best {
            None => true,
            Some((s, v)) => {
                let tie = (value - v).abs() <= 1e-12 * v.abs().max(1.0);
                if tie {
                    set < *s
                } else {
                    value < *v
                }
            }
        };
        if better {
            best = Some((set, value));
        }
    }
    best.ok_or(Error::Infeasible)
}
