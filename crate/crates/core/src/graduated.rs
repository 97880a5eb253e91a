//! Graduated assignment for `min Σ_i (a_i + c_i(X))^2` over perfect
//! bipartite matchings: annealed softassign with Sinkhorn balancing, then a
//! Hungarian rounding of the final soft assignment.

use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::robust_modular::AffineFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub beta_start: f64,
    pub beta_rate: f64,
    pub beta_max: f64,
    /// Softassign updates per temperature.
    pub inner_iterations: usize,
    /// Row/column balancing sweeps per update.
    pub sinkhorn_sweeps: usize,
    pub tol: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            beta_start: 0.5,
            beta_rate: 1.075,
            beta_max: 10.0,
            inner_iterations: 30,
            sinkhorn_sweeps: 30,
            tol: 1e-4,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.beta_start > 0.0
            && self.beta_rate > 1.0
            && self.beta_max >= self.beta_start
            && self.inner_iterations > 0
            && self.sinkhorn_sweeps > 0
            && self.tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid graduated assignment schedule {self:?}"
            )))
        }
    }
}

/// `Σ_i (a_i + c_i · m)^2` at a soft assignment `m` over edges.
pub fn quadratic_value(fam: &AffineFamily, m: &[f64]) -> f64 {
    fam.members()
        .iter()
        .map(|f| {
            let v = f.constant() + f.weights().iter().zip(m).map(|(c, x)| c * x).sum::<f64>();
            v * v
        })
        .sum()
}

fn gradient(fam: &AffineFamily, m: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; m.len()];
    for f in fam.members() {
        let v = f.constant() + f.weights().iter().zip(m).map(|(c, x)| c * x).sum::<f64>();
        for (ge, &c) in g.iter_mut().zip(f.weights()) {
            *ge += 2.0 * c * v;
        }
    }
    g
}

/// Perfect matching (edge indices) approximately minimizing the quadratic
/// power mean `Σ_i f_i(X)^2`.
pub fn graduated_assignment(fam: &AffineFamily, c: &Constraint, cfg: &GaConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    if !c.is_matching() {
        return Err(Error::NotApplicable(
            "graduated assignment needs a perfect bipartite matching constraint".into(),
        ));
    }
    let g = c.graph().expect("matching has a graph");
    let left = g.left_size().expect("matching has a bipartition");
    let ends: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| if u < left { (u, v - left) } else { (v, u - left) })
        .collect();
    let balance = |m: &mut Vec<f64>| {
        for _ in 0..cfg.sinkhorn_sweeps {
            let mut row = vec![0.0; left];
            for (e, &(u, _)) in ends.iter().enumerate() {
                row[u] += m[e];
            }
            for (e, &(u, _)) in ends.iter().enumerate() {
                if row[u] > 0.0 {
                    m[e] /= row[u];
                }
            }
            let mut col = vec![0.0; left];
            for (e, &(_, v)) in ends.iter().enumerate() {
                col[v] += m[e];
            }
            let mut worst: f64 = 0.0;
            for (e, &(_, v)) in ends.iter().enumerate() {
                if col[v] > 0.0 {
                    m[e] /= col[v];
                }
            }
            // row sums after the column step measure the remaining imbalance
            let mut row = vec![0.0; left];
            for (e, &(u, _)) in ends.iter().enumerate() {
                row[u] += m[e];
            }
            for r in row {
                worst = worst.max((r - 1.0).abs());
            }
            if worst < cfg.tol {
                break;
            }
        }
    };

    let mut m = vec![1.0; ends.len()];
    balance(&mut m);
    let scale = {
        let g0 = gradient(fam, &m);
        let spread = g0.iter().copied().fold(0.0, f64::max) - g0.iter().copied().fold(f64::INFINITY, f64::min);
        if spread > 1e-12 {
            spread
        } else {
            g0.iter().copied().fold(0.0, f64::max).max(1.0)
        }
    };
    let mut beta = cfg.beta_start;
    while beta <= cfg.beta_max {
        for _ in 0..cfg.inner_iterations {
            let grad = gradient(fam, &m);
            let low = grad.iter().copied().fold(f64::INFINITY, f64::min);
            let mut next: Vec<f64> = grad
                .iter()
                .map(|&ge| (-beta * (ge - low) / scale).exp().max(1e-200))
                .collect();
            balance(&mut next);
            let change = next.iter().zip(&m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            m = next;
            if change < cfg.tol {
                break;
            }
        }
        beta *= cfg.beta_rate;
    }
    let costs: Vec<f64> = m.iter().map(|&x| (1.0 - x).max(0.0)).collect();
    Ok(c.linear_minimize(&costs)?.set)
}
