use super::{Algorithm, RobustInstance, SolveReport, TraceEntry};
use crate::bounds::{modular_upper_bound, UpperVariant};
use crate::error::Result;
use crate::graduated::GaConfig;
use crate::robust_modular::{solve_robust_min_with, AffineFamily, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MminVariant {
    First,
    Second,
    /// First bound on even iterations, second on odd ones.
    Alternating,
}

impl MminVariant {
    fn at(self, iteration: usize) -> UpperVariant {
        match self {
            MminVariant::First => UpperVariant::First,
            MminVariant::Second => UpperVariant::Second,
            MminVariant::Alternating if iteration.is_multiple_of(2) => UpperVariant::First,
            MminVariant::Alternating => UpperVariant::Second,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MminOptions {
    pub variant: MminVariant,
    pub strategies: Vec<Strategy>,
    pub max_iterations: usize,
    /// Relative decrease of the true objective needed to accept a step.
    pub rel_tol: f64,
    /// Number of starts; the first is anchored at ∅, the rest at random
    /// feasible sets.
    pub restarts: usize,
    pub seed: u64,
    pub ga: GaConfig,
}

impl Default for MminOptions {
    fn default() -> Self {
        Self {
            variant: MminVariant::Alternating,
            strategies: Strategy::LINEAR.to_vec(),
            max_iterations: 50,
            rel_tol: 1e-6,
            restarts: 1,
            seed: 0,
            ga: GaConfig::default(),
        }
    }
}

struct Run {
    set: Vec<usize>,
    value: f64,
    accepted: usize,
    beta: f64,
}

fn run_from(inst: &RobustInstance, opts: &MminOptions, anchor: Vec<usize>, trace: &mut Vec<TraceEntry>) -> Result<Run> {
    let c = inst.constraint();
    let mut anchor = anchor;
    let mut best = if c.is_feasible(&anchor) {
        inst.value(&anchor)
    } else {
        f64::INFINITY
    };
    let mut run = Run {
        set: anchor.clone(),
        value: best,
        accepted: 0,
        beta: 1.0,
    };
    for t in 0..opts.max_iterations {
        let bounds = inst
            .objective()
            .functions()
            .iter()
            .map(|f| modular_upper_bound(f, &anchor, opts.variant.at(t)))
            .collect::<Result<Vec<_>>>()?;
        let fam = AffineFamily::from_bounds(&bounds)?;
        let sol = solve_robust_min_with(&fam, c, &opts.strategies, &opts.ga)?;
        let value = inst.value(&sol.set);
        let accepted = value < best - opts.rel_tol * best.abs() || best.is_infinite();
        if accepted {
            best = value;
            run.set = sol.set.clone();
            run.value = value;
            run.accepted += 1;
            run.beta = run.beta.max(sol.beta);
        }
        trace.push(TraceEntry {
            iteration: t,
            surrogate: sol.value,
            value,
            best,
            accepted,
        });
        if !accepted {
            break;
        }
        anchor = sol.set;
    }
    Ok(run)
}

/// Majorization-minimization: repeatedly minimize the max of the modular
/// upper bounds anchored at the current set, accepting only true
/// improvements.
pub fn mmin(inst: &RobustInstance, opts: &MminOptions) -> Result<SolveReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace = Vec::new();
    let mut best = run_from(inst, opts, Vec::new(), &mut trace)?;
    let mut accepted = best.accepted;
    for _ in 1..opts.restarts {
        let costs: Vec<f64> = (0..inst.n()).map(|_| rng.random::<f64>()).collect();
        let anchor = inst.constraint().linear_minimize(&costs)?.set;
        let run = run_from(inst, opts, anchor, &mut trace)?;
        accepted += run.accepted;
        if run.value < best.value {
            best = run;
        }
    }
    let mut report = SolveReport::new(Algorithm::Mmin, inst, best.set);
    report.iterations = accepted;
    report.trace = trace;
    report.beta = best.beta;
    let kappa = inst.worst_curvature();
    report.factor = Some(best.beta * inst.curvature_factor(report.set.len(), kappa));
    Ok(report)
}
