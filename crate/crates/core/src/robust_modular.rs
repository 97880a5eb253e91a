//! Min-max over affine families: `min_{X ∈ C} max_i (a_i + c_i(X))`.

use crate::bounds::ModularBound;
use crate::constraints::Constraint;
use crate::error::{Error, Result};
use crate::function::ModularFunction;
use crate::graduated::{graduated_assignment, GaConfig};

/// Entries this far below zero are roundoff and get clamped.
const CLAMP_TOL: f64 = 1e-9;

/// `l` affine functions with nonnegative constants and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    members: Vec<ModularFunction>,
}

impl AffineFamily {
    pub fn new(members: Vec<ModularFunction>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("affine family needs at least one member".into()))?
            .len();
        let clamp = |v: f64, what: &str| {
            if v < -CLAMP_TOL {
                Err(Error::InvalidArgument(format!("negative {what} {v} in affine family")))
            } else {
                Ok(v.max(0.0))
            }
        };
        let mut out = Vec::with_capacity(members.len());
        for m in members {
            if m.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.len(),
                });
            }
            let weights = m
                .weights()
                .iter()
                .map(|&w| clamp(w, "weight"))
                .collect::<Result<Vec<_>>>()?;
            out.push(ModularFunction::with_constant(
                weights,
                clamp(m.constant(), "constant")?,
            )?);
        }
        Ok(Self { members: out })
    }

    pub fn from_bounds(bounds: &[ModularBound]) -> Result<Self> {
        Self::new(bounds.iter().map(|b| b.surrogate.clone()).collect())
    }

    pub fn members(&self) -> &[ModularFunction] {
        &self.members
    }

    pub fn l(&self) -> usize {
        self.members.len()
    }

    pub fn n(&self) -> usize {
        self.members[0].len()
    }

    pub fn values(&self, set: &[usize]) -> Vec<f64> {
        self.members.iter().map(|m| m.value(set)).collect()
    }

    /// `max_i (a_i + c_i(X))`.
    pub fn value(&self, set: &[usize]) -> f64 {
        self.values(set).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Per-element and constant averages.
    pub fn avg_surrogate(&self) -> ModularFunction {
        let l = self.l() as f64;
        let mut weights = vec![0.0; self.n()];
        let mut constant = 0.0;
        for m in &self.members {
            for (w, &c) in weights.iter_mut().zip(m.weights()) {
                *w += c / l;
            }
            constant += m.constant() / l;
        }
        ModularFunction::with_constant(weights, constant).expect("finite averages")
    }

    /// Per-element and constant maxima.
    pub fn max_surrogate(&self) -> ModularFunction {
        let mut weights = vec![0.0f64; self.n()];
        let mut constant = 0.0f64;
        for m in &self.members {
            for (w, &c) in weights.iter_mut().zip(m.weights()) {
                *w = w.max(c);
            }
            constant = constant.max(m.constant());
        }
        ModularFunction::with_constant(weights, constant).expect("finite maxima")
    }

    /// `(Σ_i f_i(X)^a)^{1/a}`, computed relative to the largest term.
    pub fn power_mean_value(&self, a: u32, set: &[usize]) -> Result<f64> {
        if a == 0 {
            return Err(Error::InvalidArgument("power mean exponent must be >= 1".into()));
        }
        let values = self.values(set);
        let top = values.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = values.iter().map(|&v| (v / top).powi(a as i32)).sum();
        Ok(top * sum.powf(1.0 / a as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Average,
    Max,
    /// Graduated assignment on `Σ_i f_i(X)^2`; matchings only.
    Quadratic,
}

impl Strategy {
    pub const LINEAR: [Strategy; 2] = [Strategy::Average, Strategy::Max];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Average => "avg",
            Strategy::Max => "max",
            Strategy::Quadratic => "quadratic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxSolution {
    pub set: Vec<usize>,
    /// `max_i (a_i + c_i(set))`.
    pub value: f64,
    pub strategy: Strategy,
    pub beta: f64,
}

/// Runs every strategy and keeps the candidate with the smallest true max
/// (ties to the earlier strategy).
pub fn solve_robust_min(fam: &AffineFamily, c: &Constraint, strategies: &[Strategy]) -> Result<MinMaxSolution> {
    solve_robust_min_with(fam, c, strategies, &GaConfig::default())
}

pub fn solve_robust_min_with(
    fam: &AffineFamily,
    c: &Constraint,
    strategies: &[Strategy],
    ga: &GaConfig,
) -> Result<MinMaxSolution> {
    if strategies.is_empty() {
        return Err(Error::InvalidArgument("no min-max strategy selected".into()));
    }
    if fam.n() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: c.n(),
            got: fam.n(),
        });
    }
    let mut best: Option<MinMaxSolution> = None;
    for &strategy in strategies {
        let (set, beta) = match strategy {
            Strategy::Average => {
                let sol = c.linear_minimize(fam.avg_surrogate().weights())?;
                (sol.set, sol.beta)
            }
            Strategy::Max => {
                let sol = c.linear_minimize(fam.max_surrogate().weights())?;
                (sol.set, sol.beta)
            }
            Strategy::Quadratic => (graduated_assignment(fam, c, ga)?, 1.0),
        };
        let value = fam.value(&set);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(MinMaxSolution {
                set,
                value,
                strategy,
                beta,
            });
        }
    }
    Ok(best.expect("at least one strategy"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn family(rows: &[(&[f64], f64)]) -> AffineFamily {
        AffineFamily::new(
            rows.iter()
                .map(|(w, a)| ModularFunction::with_constant(w.to_vec(), *a).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn random_family(rng: &mut ChaCha8Rng, l: usize, n: usize) -> AffineFamily {
        AffineFamily::new(
            (0..l)
                .map(|_| {
                    let w = (0..n).map(|_| rng.random::<f64>()).collect();
                    ModularFunction::with_constant(w, rng.random::<f64>()).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn avg_and_max_examples() {
        let fam = family(&[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0)]);
        assert_eq!(fam.avg_surrogate().weights(), &[0.5, 0.5]);
        assert_eq!(fam.max_surrogate().weights(), &[1.0, 1.0]);
        let single = family(&[(&[0.3, 2.0], 1.5)]);
        assert_eq!(single.avg_surrogate(), single.members()[0]);
        assert_eq!(single.max_surrogate(), single.members()[0]);
    }

    #[test]
    fn identical_members_make_max_exact() {
        let fam = family(&[(&[0.3, 2.0, 1.0], 0.5), (&[0.3, 2.0, 1.0], 0.5)]);
        for bits in 0u64..8 {
            let s = sets::from_bits(bits, 3);
            assert!((fam.max_surrogate().value(&s) - fam.value(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_sandwiches_hold_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for l in 1..=3 {
            let fam = random_family(&mut rng, l, 6);
            let (avg, max) = (fam.avg_surrogate(), fam.max_surrogate());
            let lf = l as f64;
            for bits in 0u64..64 {
                let s = sets::from_bits(bits, 6);
                let f = fam.value(&s);
                assert!(avg.value(&s) <= f + 1e-9 && f <= lf * avg.value(&s) + 1e-9);
                assert!(f <= max.value(&s) + 1e-9 && max.value(&s) <= lf * f + 1e-9);
                for a in [1, 2, 3, 64] {
                    let p = fam.power_mean_value(a, &s).unwrap();
                    assert!(f <= p + 1e-9 && p <= lf.powf(1.0 / a as f64) * f + 1e-9);
                }
            }
        }
    }

    #[test]
    fn power_mean_limits() {
        let fam = family(&[(&[1.0, 0.0], 0.0), (&[0.0, 3.0], 0.0), (&[1.0, 1.0], 0.0)]);
        let s = [0, 1];
        assert!((fam.power_mean_value(1, &s).unwrap() - 6.0).abs() < 1e-12);
        let p = fam.power_mean_value(64, &s).unwrap();
        assert!((3.0..=3.0 * 1.01).contains(&p));
        assert!(fam.power_mean_value(0, &s).is_err());
        let huge = family(&[(&[1e300], 0.0), (&[1e300], 0.0)]);
        assert!(huge.power_mean_value(2, &[0]).unwrap().is_finite());
    }

    #[test]
    fn negative_entries_rejected_or_clamped() {
        let tiny = family(&[(&[-1e-12, 1.0], -1e-12)]);
        assert_eq!(tiny.members()[0].weights(), &[0.0, 1.0]);
        assert_eq!(tiny.members()[0].constant(), 0.0);
        assert!(AffineFamily::new(vec![ModularFunction::new(vec![-1.0]).unwrap()]).is_err());
    }

    #[test]
    fn free_element_wins() {
        let fam = family(&[(&[1.0, 0.0, 0.0], 0.0), (&[0.0, 1.0, 0.0], 0.0)]);
        let c = Constraint::cardinality_at_least(3, 1).unwrap();
        let sol = solve_robust_min(&fam, &c, &Strategy::LINEAR).unwrap();
        assert_eq!(sol.set, vec![2]);
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn single_member_is_exact() {
        let fam = family(&[(&[3.0, 1.0, 2.0], 0.0)]);
        let c = Constraint::cardinality_at_least(3, 2).unwrap();
        let sol = solve_robust_min(&fam, &c, &[Strategy::Average]).unwrap();
        assert_eq!(sol.set, vec![1, 2]);
        assert_eq!(sol.value, 3.0);
    }

    #[test]
    fn within_l_of_optimum_on_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10;
        for _ in 0..20 {
            let fam = random_family(&mut rng, 3, n);
            let c = Constraint::cardinality_at_least(n, 3).unwrap();
            let sol = solve_robust_min(&fam, &c, &Strategy::LINEAR).unwrap();
            assert!(c.is_feasible(&sol.set));
            let opt = (0u64..1 << n)
                .map(|b| sets::from_bits(b, n))
                .filter(|s| c.is_feasible(s))
                .map(|s| fam.value(&s))
                .fold(f64::INFINITY, f64::min);
            assert!(sol.value <= 3.0 * opt + 1e-9);
        }
    }

    #[test]
    fn quadratic_requires_matching() {
        let fam = family(&[(&[1.0, 2.0], 0.0)]);
        let c = Constraint::cardinality_at_least(2, 1).unwrap();
        assert!(matches!(
            solve_robust_min(&fam, &c, &[Strategy::Quadratic]),
            Err(Error::NotApplicable(_))
        ));
    }
}
