use super::{Algorithm, MminOptions, RobustInstance, SolveReport, TraceEntry};
use crate::bounds::{lovasz, modular_upper_bound, UpperVariant};
use crate::constraints::{Constraint, CoverRow, CoveringFamily};
use crate::error::{Error, Result};
use crate::robust_modular::{solve_robust_min, AffineFamily, Strategy};
use crate::sets;
use microlp::{ComparisonOp, OptimizationDirection, Problem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `scale / (‖g_t‖ √t)`.
    Diminishing {
        scale: f64,
    },
    Fixed(f64),
    /// Polyak step toward the level `best - δ`; `δ` starts at
    /// `gap · |best|` and halves whenever the descent stalls.
    Polyak {
        gap: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrOptions {
    pub step: StepRule,
    pub max_iterations: usize,
    pub projection_tol: f64,
    /// Improvements of the best value below this do not reset the stall count.
    pub convergence_tol: f64,
    /// Stop after this many iterations without improvement.
    pub stall_window: usize,
    /// Dykstra cycles allowed per projection.
    pub max_projection_cycles: usize,
    /// Times a stalled descent resumes from the best point with half the step.
    pub max_restarts: usize,
    /// Settings of the MMin run whose answer seeds the descent.
    pub mmin: MminOptions,
    /// Cutting-plane rounds run after the descent; 0 disables the polish.
    pub polish_rounds: usize,
}

impl Default for CrOptions {
    fn default() -> Self {
        Self {
            step: StepRule::Polyak { gap: 0.3 },
            max_iterations: 500,
            projection_tol: 1e-7,
            convergence_tol: 1e-6,
            stall_window: 50,
            max_projection_cycles: 2000,
            max_restarts: 4,
            mmin: MminOptions::default(),
            polish_rounds: 200,
        }
    }
}

impl CrOptions {
    pub fn validate(&self) -> Result<()> {
        let step_ok = match self.step {
            StepRule::Diminishing { scale } => scale > 0.0,
            StepRule::Fixed(s) => s > 0.0,
            StepRule::Polyak { gap } => gap > 0.0,
        };
        if step_ok
            && self.max_iterations > 0
            && self.projection_tol > 0.0
            && self.convergence_tol > 0.0
            && self.stall_window > 0
            && self.max_projection_cycles > 0
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid CR options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionOutcome {
    Converged,
    /// Dykstra hit its cycle cap; the point was pulled back toward a known
    /// feasible point instead.
    Repaired,
}

/// `g(x) = max_i f̂_i(x)` with the subgradient of the worst index.
fn max_lovasz(inst: &RobustInstance, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for f in inst.objective().functions() {
        let lv = lovasz(f, x)?;
        if best.as_ref().is_none_or(|(v, _)| lv.value > *v) {
            best = Some((lv.value, lv.subgradient));
        }
    }
    Ok(best.expect("l >= 1"))
}

struct Projector<'a> {
    family: CoveringFamily,
    rows: Vec<CoverRow>,
    anchor: &'a [f64],
    tol: f64,
    max_cycles: usize,
}

impl Projector<'_> {
    fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| -r.slack(x)).fold(0.0, f64::max);
        let boxed = x.iter().map(|&v| (v - 1.0).max(-v)).fold(0.0, f64::max);
        rows.max(boxed)
    }

    /// Dykstra's alternating projection onto the box and the known rows,
    /// growing the row set by separation until nothing is violated.
    fn project(&mut self, y: &[f64]) -> (Vec<f64>, ProjectionOutcome) {
        let n = y.len();
        let mut x = y.to_vec();
        let mut incr: Vec<Vec<f64>> = vec![vec![0.0; n]; self.rows.len() + 1];
        let mut cycles = 0;
        loop {
            while cycles < self.max_cycles {
                cycles += 1;
                let mut change: f64 = 0.0;
                for k in 0..=self.rows.len() {
                    let z: Vec<f64> = x.iter().zip(&incr[k]).map(|(a, p)| a + p).collect();
                    let mut next = z.clone();
                    if k == 0 {
                        for v in &mut next {
                            *v = v.clamp(0.0, 1.0);
                        }
                    } else {
                        let row = &self.rows[k - 1];
                        let deficit = -row.slack(&z);
                        if deficit > 0.0 {
                            let lift = deficit / row.members.len() as f64;
                            for &j in &row.members {
                                next[j] += lift;
                            }
                        }
                    }
                    for j in 0..n {
                        incr[k][j] = z[j] - next[j];
                        change = change.max((next[j] - x[j]).abs());
                    }
                    x = next;
                }
                if change < self.tol * 1e-2 && self.max_violation(&x) <= self.tol {
                    break;
                }
            }
            if cycles >= self.max_cycles {
                break;
            }
            match self.family.separate_with_tol(&x, self.tol) {
                Some(v) if !self.rows.contains(&v.row) => {
                    self.rows.push(v.row);
                    incr.push(vec![0.0; n]);
                }
                Some(_) => {
                    // known row still violated: keep cycling
                    if cycles >= self.max_cycles {
                        break;
                    }
                }
                None => {
                    for v in &mut x {
                        *v = v.clamp(0.0, 1.0);
                    }
                    if self.family.separate_with_tol(&x, self.tol).is_none() {
                        return (x, ProjectionOutcome::Converged);
                    }
                }
            }
        }
        (self.repair(x), ProjectionOutcome::Repaired)
    }

    /// Smallest step toward the feasible anchor that satisfies the family.
    fn repair(&self, x: Vec<f64>) -> Vec<f64> {
        let mix = |lambda: f64| -> Vec<f64> {
            x.iter()
                .zip(self.anchor)
                .map(|(a, b)| ((1.0 - lambda) * a + lambda * b).clamp(0.0, 1.0))
                .collect()
        };
        let ok = |p: &[f64]| self.family.separate_with_tol(p, self.tol).is_none();
        let (mut lo, mut hi) = (0.0, 1.0);
        if ok(&mix(lo)) {
            return mix(lo);
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if ok(&mix(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        mix(hi)
    }
}

/// Kelley cutting planes: minimize `t` over the box, the covering rows, and
/// the linearizations `t >= f_i(∅) + <h, x>` gathered so far, adding rows
/// and linearizations at each LP optimum until the LP bound meets the best
/// value found. Returns the best point, its value, and the final bound.
fn cutting_planes(
    inst: &RobustInstance,
    projector: &mut Projector<'_>,
    start: &[f64],
    rounds: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let n = inst.n();
    let fs = inst.objective().functions();
    let mut cuts: Vec<(f64, Vec<f64>)> = Vec::new();
    let add_cuts = |x: &[f64], cuts: &mut Vec<(f64, Vec<f64>)>| -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for f in fs {
            let lv = lovasz(f, x)?;
            worst = worst.max(lv.value);
            cuts.push((f.empty_value(), lv.subgradient));
        }
        Ok(worst)
    };
    let mut best_x = start.to_vec();
    let mut best = add_cuts(start, &mut cuts)?;
    let mut bound = f64::NEG_INFINITY;
    let mut round = 0;
    while round < rounds && best - bound > tol {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let xs: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
        let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        for (constant, h) in &cuts {
            let mut expr: Vec<_> = xs.iter().zip(h).map(|(&v, &c)| (v, -c)).collect();
            expr.push((t, 1.0));
            lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, *constant);
        }
        for row in &projector.rows {
            let expr: Vec<_> = row.members.iter().map(|&j| (xs[j], 1.0)).collect();
            lp.add_constraint(expr.as_slice(), ComparisonOp::Ge, row.demand as f64);
        }
        let solution = lp
            .solve()
            .ok()
            .and_then(|outcome| outcome.into_solution().ok())
            .ok_or_else(|| Error::NotApplicable("cutting-plane LP failed".into()))?;
        let x: Vec<f64> = xs.iter().map(|&v| solution.var_value(v).clamp(0.0, 1.0)).collect();
        if let Some(v) = projector.family.separate_with_tol(&x, projector.tol) {
            if projector.rows.contains(&v.row) {
                break;
            }
            projector.rows.push(v.row);
            continue;
        }
        round += 1;
        bound = solution.objective();
        let value = add_cuts(&x, &mut cuts)?;
        if value < best {
            best = value;
            best_x = x;
        }
    }
    Ok((best_x, best, bound))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rounding {
    pub set: Vec<usize>,
    /// Smallest coordinate of `x` in the chosen prefix.
    pub threshold: f64,
    pub prefix_len: usize,
    pub beta: f64,
}

/// Chain rounding: the shortest prefix of `x` sorted descending whose
/// closure meets the constraint, shrunk to a feasible subset.
pub fn round_chain(x: &[f64], c: &Constraint) -> Result<Rounding> {
    if x.len() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            got: x.len(),
        });
    }
    let order = sets::descending_order(x);
    let mut inside = vec![false; c.n()];
    for (k, &j) in order.iter().enumerate() {
        inside[j] = true;
        if c.closure_contains(&inside) {
            let sol = c.linear_minimize_within(&vec![1.0; c.n()], &inside)?;
            return Ok(Rounding {
                set: sol.set,
                threshold: x[j],
                prefix_len: k + 1,
                beta: sol.beta,
            });
        }
    }
    Err(Error::Infeasible)
}

/// Continuous relaxation: projected subgradient descent on `max_i f̂_i`
/// over the covering polytope, then chain rounding of the best iterate.
pub fn cr(inst: &RobustInstance, opts: &CrOptions) -> Result<SolveReport> {
    opts.validate()?;
    let c = inst.constraint();
    let n = inst.n();
    let empty_bounds = inst
        .objective()
        .functions()
        .iter()
        .map(|f| modular_upper_bound(f, &[], UpperVariant::First))
        .collect::<Result<Vec<_>>>()?;
    let fam = AffineFamily::from_bounds(&empty_bounds)?;
    let warm = c.linear_minimize(fam.max_surrogate().weights())?.set;
    let anchor = sets::indicator(&warm, n);

    let mut best_x = anchor.clone();
    let mut best = max_lovasz(inst, &best_x)?.0;
    let avg = solve_robust_min(&fam, c, &[Strategy::Average])?.set;
    let mm = super::mmin::mmin(inst, &opts.mmin)?.set;
    for set in [avg, mm] {
        let v = inst.value(&set);
        if v < best {
            best = v;
            best_x = sets::indicator(&set, n);
        }
    }

    let family = c.covering_family();
    let mut projector = Projector {
        rows: family.rows().map(<[_]>::to_vec).unwrap_or_default(),
        family,
        anchor: &anchor,
        tol: opts.projection_tol,
        max_cycles: opts.max_projection_cycles,
    };
    let mut report_notes = Vec::new();
    let mut trace = Vec::new();
    let mut x = best_x.clone();
    let mut iterations = 0;
    let mut repaired = 0;
    let mut scale = match opts.step {
        StepRule::Diminishing { scale } => scale,
        StepRule::Fixed(s) => s,
        StepRule::Polyak { gap } => gap * best.abs().max(1e-12),
    };
    // g(y) >= g(x) + <s, y - x> on the polytope, and the smallest <s, y> is
    // attained at a vertex since s >= 0
    let mut lower = f64::NEG_INFINITY;
    let mut local = 0;
    let mut last_improvement = 0;
    let mut restarts = 0;
    for t in 1..=opts.max_iterations {
        let (current, grad) = max_lovasz(inst, &x)?;
        let norm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-15 {
            break;
        }
        iterations = t;
        local += 1;
        let lmo = c.linear_minimize(&grad).ok();
        if let Some(sol) = &lmo {
            let inner: f64 = grad.iter().zip(&x).map(|(g, v)| g * v).sum();
            lower = lower.max(current + sol.cost - inner);
        }
        let step = match opts.step {
            StepRule::Diminishing { .. } => scale / (norm * (local as f64).sqrt()),
            StepRule::Fixed(_) => scale,
            StepRule::Polyak { .. } => (current - best + scale) / (norm * norm),
        };
        let y: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        let (next, outcome) = projector.project(&y);
        if outcome == ProjectionOutcome::Repaired {
            repaired += 1;
        }
        x = next;
        let value = max_lovasz(inst, &x)?.0;
        if value < best {
            if best - value > opts.convergence_tol {
                last_improvement = t;
            }
            best = value;
            best_x = x.clone();
        }
        // vertices reached by rounding the iterate or minimizing its
        // subgradient are points of the polytope too
        let mut vertices = Vec::with_capacity(2);
        if let Ok(r) = round_chain(&x, c) {
            vertices.push(r.set);
        }
        if let Some(sol) = lmo {
            vertices.push(sol.set);
        }
        for set in vertices {
            let v = inst.value(&set);
            if v < best {
                if best - v > opts.convergence_tol {
                    last_improvement = t;
                }
                best = v;
                best_x = sets::indicator(&set, n);
            }
        }
        trace.push(TraceEntry {
            iteration: t,
            surrogate: value,
            value,
            best,
            accepted: best == value,
        });
        if best - lower <= opts.convergence_tol {
            break;
        }
        if t - last_improvement >= opts.stall_window {
            if restarts == opts.max_restarts {
                break;
            }
            // shrink the step and resume from the best point
            restarts += 1;
            scale *= 0.5;
            local = 0;
            last_improvement = t;
            x = best_x.clone();
        }
    }
    if repaired > 0 {
        report_notes.push(format!("projection repaired {repaired} times"));
    }
    if opts.polish_rounds > 0 && best - lower > opts.convergence_tol {
        let (x, value, bound) =
            cutting_planes(inst, &mut projector, &best_x, opts.polish_rounds, opts.convergence_tol)?;
        if value < best {
            best = value;
            best_x = x;
        }
        if best - bound > opts.convergence_tol {
            report_notes.push(format!("relaxation gap {:.3e} after polish", best - bound));
        }
    }

    let rounding = round_chain(&best_x, c)?;
    let mut report = SolveReport::new(Algorithm::Cr, inst, rounding.set);
    report.iterations = iterations;
    report.trace = trace;
    report.beta = rounding.beta;
    report.continuous_value = Some(best);
    report.threshold = Some(rounding.threshold);
    report.factor = projector.family.rounding_factor().map(|f| f as f64);
    report.notes = report_notes;
    Ok(report)
}
