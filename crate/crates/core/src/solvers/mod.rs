//! Solver families for `min_{X ∈ C} max_i f_i(X)`.

mod aa;
mod cr;
mod ea;
mod mmin;

pub use aa::{solve_aa, AaInner, AaOptions};
pub use cr::{cr, round_chain, CrOptions, ProjectionOutcome, Rounding, StepRule};
pub use ea::{ea, EaOptions};
pub use mmin::{mmin, MminOptions, MminVariant};

use crate::bounds::{curvature, kappa_factor};
use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::function::RobustObjective;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct RobustInstance {
    objective: RobustObjective,
    constraint: Constraint,
}

impl RobustInstance {
    pub fn new(objective: RobustObjective, constraint: Constraint) -> Result<Self> {
        if objective.n() != constraint.n() {
            return Err(Error::DimensionMismatch {
                expected: constraint.n(),
                got: objective.n(),
            });
        }
        Ok(Self { objective, constraint })
    }

    pub fn objective(&self) -> &RobustObjective {
        &self.objective
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn n(&self) -> usize {
        self.constraint.n()
    }

    pub fn l(&self) -> usize {
        self.objective.l()
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        self.objective.value(set)
    }

    /// `max_i κ_{f_i}`.
    pub fn worst_curvature(&self) -> f64 {
        self.objective.functions().iter().map(curvature).fold(0.0, f64::max)
    }

    /// `l · K(v, κ)` with `v = max(size, 1)`.
    pub fn curvature_factor(&self, size: usize, kappa: f64) -> f64 {
        self.l() as f64 * kappa_factor(size.max(1) as f64, kappa).expect("valid K arguments")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Average approximation solved by single-function MMin.
    AaMmin,
    /// Average approximation solved by single-function EA.
    AaEa,
    Mmin,
    Ea,
    Cr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::AaMmin,
        Algorithm::AaEa,
        Algorithm::Mmin,
        Algorithm::Ea,
        Algorithm::Cr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AaMmin => "mmin-aa",
            Algorithm::AaEa => "ea-aa",
            Algorithm::Mmin => "mmin",
            Algorithm::Ea => "ea",
            Algorithm::Cr => "cr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Surrogate objective of the step (continuous value for CR).
    pub surrogate: f64,
    pub value: f64,
    /// Best value seen up to and including this step.
    pub best: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub set: Vec<usize>,
    /// `max_i f_i(set)`.
    pub value: f64,
    /// Accepted steps (MMin) or descent iterations (CR).
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    /// Worst-case guarantee for this run, where one is available.
    pub factor: Option<f64>,
    /// Approximation factor of the inner linear oracle.
    pub beta: f64,
    /// Best continuous value (CR only).
    pub continuous_value: Option<f64>,
    /// Smallest coordinate in the rounded prefix (CR only).
    pub threshold: Option<f64>,
    pub notes: Vec<String>,
}

impl SolveReport {
    fn new(algorithm: Algorithm, inst: &RobustInstance, set: Vec<usize>) -> Self {
        let value = inst.value(&set);
        Self {
            algorithm,
            set,
            value,
            iterations: 0,
            trace: Vec::new(),
            factor: None,
            beta: 1.0,
            continuous_value: None,
            threshold: None,
            notes: Vec::new(),
        }
    }
}

/// Options for every algorithm run by [`solve_all`].
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub mmin: MminOptions,
    pub ea: EaOptions,
    pub cr: CrOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveAll {
    /// Successful runs, ascending by value (ties in algorithm order).
    pub reports: Vec<SolveReport>,
    pub failures: Vec<(Algorithm, Error)>,
}

pub fn run(inst: &RobustInstance, algorithm: Algorithm, opts: &SolveOptions) -> Result<SolveReport> {
    match algorithm {
        Algorithm::AaMmin => solve_aa(
            inst,
            &AaOptions {
                inner: AaInner::Mmin(opts.mmin.clone()),
            },
        ),
        Algorithm::AaEa => solve_aa(
            inst,
            &AaOptions {
                inner: AaInner::Ea(opts.ea.clone()),
            },
        ),
        Algorithm::Mmin => mmin(inst, &opts.mmin),
        Algorithm::Ea => ea(inst, &opts.ea),
        Algorithm::Cr => cr(inst, &opts.cr),
    }
}

pub fn solve_all(inst: &RobustInstance) -> SolveAll {
    solve_selected(inst, &Algorithm::ALL, &SolveOptions::default())
}

pub fn solve_selected(inst: &RobustInstance, algorithms: &[Algorithm], opts: &SolveOptions) -> SolveAll {
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &a in algorithms {
        match run(inst, a, opts) {
            Ok(r) => reports.push(r),
            Err(e) => {
                log::warn!("{a} failed: {e}");
                failures.push((a, e));
            }
        }
    }
    reports.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.algorithm.cmp(&b.algorithm)));
    SolveAll { reports, failures }
}
