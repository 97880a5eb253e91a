//! Curvature, the Lovász extension, and modular/ellipsoidal surrogates.

use crate::error::{Error, Result};
use crate::function::{ModularFunction, SetFunction};
use crate::sets;

const DEGENERATE_GAIN: f64 = 1e-12;

/// Total curvature `κ_f = 1 - min_j f(j | V \ j) / f(j | ∅)`.
///
/// Elements with vanishing singleton gain make the ratio undefined; in that
/// case the function is reported as fully curved (`κ = 1`) and a warning is
/// logged.
pub fn curvature(f: &SetFunction) -> f64 {
    let mut min_ratio = f64::INFINITY;
    for (j, (&single, &tail)) in f.singleton_gains().iter().zip(f.tail_gains()).enumerate() {
        if single <= DEGENERATE_GAIN {
            log::warn!("element {j} has zero singleton gain; curvature reported as 1");
            return 1.0;
        }
        min_ratio = min_ratio.min(tail / single);
    }
    (1.0 - min_ratio).clamp(0.0, 1.0)
}

/// `K(v, κ) = v / (1 + (1 - κ)(v - 1))`.
pub fn kappa_factor(v: f64, kappa: f64) -> Result<f64> {
    if v.is_nan() || v < 1.0 {
        return Err(Error::InvalidArgument(format!("K(v, κ) needs v >= 1, got {v}")));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidArgument(format!("curvature {kappa} outside [0, 1]")));
    }
    Ok(v / (1.0 + (1.0 - kappa) * (v - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LovaszValue {
    pub value: f64,
    /// Greedy extreme point `h^f_{σ_x}`, a subgradient at `x`.
    pub subgradient: Vec<f64>,
}

/// Greedy extreme point along `order`: `h[order[i]] = f(S_{i+1}) - f(S_i)`.
fn greedy_point(f: &SetFunction, order: &[usize]) -> Vec<f64> {
    let prefix = f.prefix_values(order);
    let mut h = vec![0.0; f.n()];
    for (i, &j) in order.iter().enumerate() {
        h[j] = prefix[i + 1] - prefix[i];
    }
    h
}

/// Lovász extension `f(∅) + ⟨h^f_{σ_x}, x⟩` with `σ_x` sorting `x`
/// descending (ties by ascending index).
pub fn lovasz(f: &SetFunction, x: &[f64]) -> Result<LovaszValue> {
    if x.len() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("point has non-finite coordinates".into()));
    }
    let order = sets::descending_order(x);
    let h = greedy_point(f, &order);
    // level form f(∅)(1 - x_σ1) + Σ_k (x_σk - x_σ(k+1)) f(S_k), evaluated
    // only where the level drops, so indicators give f(A) bit for bit
    let level = |k: usize| order.get(k).map_or(0.0, |&j| x[j]);
    let mut value = f.empty_value() * (1.0 - level(0));
    let mut prefix = Vec::with_capacity(order.len());
    for k in 0..order.len() {
        prefix.push(order[k]);
        let drop = level(k) - level(k + 1);
        if drop != 0.0 {
            value += drop * f.value(&sets::canonical(&prefix));
        }
    }
    Ok(LovaszValue { value, subgradient: h })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    LowerSubgradient,
    Upper1,
    Upper2,
    UpperEmpty,
}

impl BoundKind {
    pub fn is_upper(self) -> bool {
        !matches!(self, BoundKind::LowerSubgradient)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpperVariant {
    First,
    Second,
}

/// Affine surrogate of a set function, tight at `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularBound {
    pub surrogate: ModularFunction,
    pub anchor: Vec<usize>,
    pub kind: BoundKind,
}

impl ModularBound {
    pub fn value(&self, set: &[usize]) -> f64 {
        self.surrogate.value(set)
    }
}

/// Subgradient lower bound `h_Y` built from a chain that lists `Y` first.
pub fn modular_lower_bound(f: &SetFunction, anchor: &[usize]) -> Result<ModularBound> {
    sets::validate(anchor, f.n())?;
    let inside = sets::mask(anchor, f.n());
    let order: Vec<usize> = (0..f.n())
        .filter(|&j| inside[j])
        .chain((0..f.n()).filter(|&j| !inside[j]))
        .collect();
    let h = greedy_point(f, &order);
    Ok(ModularBound {
        surrogate: ModularFunction::with_constant(h, f.empty_value())?,
        anchor: sets::canonical(anchor),
        kind: BoundKind::LowerSubgradient,
    })
}

/// The two supergradient upper bounds `m^f_{X,1}` and `m^f_{X,2}`, stored in
/// affine form (constant + weights).
pub fn modular_upper_bound(f: &SetFunction, anchor: &[usize], variant: UpperVariant) -> Result<ModularBound> {
    sets::validate(anchor, f.n())?;
    let n = f.n();
    if anchor.is_empty() {
        // Both variants coincide at the empty anchor.
        return Ok(ModularBound {
            surrogate: ModularFunction::with_constant(f.singleton_gains().to_vec(), f.empty_value())?,
            anchor: Vec::new(),
            kind: BoundKind::UpperEmpty,
        });
    }
    let inside = sets::mask(anchor, n);
    let local = f.gains_against(anchor);
    let weights: Vec<f64> = (0..n)
        .map(|j| match (variant, inside[j]) {
            (UpperVariant::First, true) => local[j],
            (UpperVariant::First, false) => f.singleton_gains()[j],
            (UpperVariant::Second, true) => f.tail_gains()[j],
            (UpperVariant::Second, false) => local[j],
        })
        .collect();
    let removed: f64 = anchor.iter().map(|&j| weights[j]).sum();
    let constant = f.value(anchor) - removed;
    Ok(ModularBound {
        surrogate: ModularFunction::with_constant(weights, constant)?,
        anchor: sets::canonical(anchor),
        kind: match variant {
            UpperVariant::First => BoundKind::Upper1,
            UpperVariant::Second => BoundKind::Upper2,
        },
    })
}

/// `f^κ(X) = [f(X) - (1 - κ) Σ_{j∈X} f(j)] / κ`.
pub fn curve_normalized(f: &SetFunction) -> Result<SetFunction> {
    let kappa = curvature(f);
    curve_normalized_with(f, kappa)
}

fn curve_normalized_with(f: &SetFunction, kappa: f64) -> Result<SetFunction> {
    if kappa <= DEGENERATE_GAIN {
        return Err(Error::NotApplicable(
            "curve normalization needs positive curvature".into(),
        ));
    }
    let correction: Vec<f64> = f.singleton_gains().iter().map(|s| -(1.0 - kappa) / kappa * s).collect();
    SetFunction::scaled_sum(vec![(1.0 / kappa, f.clone()), (1.0, SetFunction::modular(correction)?)])
}

/// Source of the modular weights `w` behind a `sqrt(w(X))` surrogate.
#[derive(Debug, Clone, PartialEq)]
pub enum EaProvider {
    /// Only for functions that already are `sqrt(w(X))`.
    ExactSqrt,
    /// `w(j) = f(j | V \ j)^2`, a lower bound by telescoping.
    GainSquared,
    UserWeights(Vec<f64>),
}

impl EaProvider {
    /// Weights of the surrogate `sqrt(w(X))` for `f`.
    pub fn weights(&self, f: &SetFunction) -> Result<Vec<f64>> {
        match self {
            EaProvider::ExactSqrt => f
                .sqrt_modular_weights()
                .ok_or_else(|| Error::NotApplicable("exact-sqrt provider needs a sqrt-of-modular function".into())),
            EaProvider::GainSquared => Ok(f.tail_gains().iter().map(|g| g.max(0.0).powi(2)).collect()),
            EaProvider::UserWeights(w) => {
                if w.len() != f.n() {
                    return Err(Error::DimensionMismatch {
                        expected: f.n(),
                        got: w.len(),
                    });
                }
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidArgument(
                        "user EA weights must be finite and nonnegative".into(),
                    ));
                }
                Ok(w.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EaSurrogate {
    /// `sqrt(w(X))` with `w` from the provider applied to `f`.
    pub lower: SetFunction,
    pub weights: Vec<f64>,
    /// `κ sqrt(w'(X)) + (1 - κ) Σ_{j∈X} f(j)` with `w'` taken from `f^κ`.
    pub combined: SetFunction,
    pub curvature: f64,
}

/// Ellipsoidal-style surrogate of `f`.
pub fn ea_surrogate(f: &SetFunction, provider: &EaProvider) -> Result<EaSurrogate> {
    let weights = provider.weights(f)?;
    let lower = SetFunction::sqrt_modular(weights.clone())?;
    let kappa = curvature(f);
    let singles = SetFunction::modular(f.singleton_gains().to_vec())?;
    let combined = if kappa <= DEGENERATE_GAIN {
        singles
    } else if matches!(provider, EaProvider::ExactSqrt) {
        // sqrt(w(X)) is its own tightest surrogate.
        f.clone()
    } else {
        let normalized = curve_normalized_with(f, kappa)?;
        let w_norm = match provider {
            EaProvider::UserWeights(w) => w.clone(),
            _ => EaProvider::GainSquared.weights(&normalized)?,
        };
        SetFunction::scaled_sum(vec![
            (kappa, SetFunction::sqrt_modular(w_norm)?),
            (1.0 - kappa, singles),
        ])?
    };
    Ok(EaSurrogate {
        lower,
        weights,
        combined,
        curvature: kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_card(n: usize) -> SetFunction {
        SetFunction::sqrt_modular(vec![1.0; n]).unwrap()
    }

    fn all_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
        (0u64..1 << n).map(move |b| sets::from_bits(b, n))
    }

    #[test]
    fn curvature_examples() {
        let m = SetFunction::modular(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(curvature(&m), 0.0);
        let k = curvature(&sqrt_card(4));
        assert!((k - (3f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((k - 0.73205).abs() < 1e-5);
        let capped = SetFunction::sqrt_modular(vec![1.0, 0.0]).unwrap();
        assert_eq!(curvature(&capped), 1.0);
    }

    #[test]
    fn curvature_with_vanishing_tail_gain_is_one() {
        // sqrt(|X|) - (sqrt2 - 1)|X| on two elements: f({0,1}) = f({0}), so
        // each element's gain vanishes once the other is present.
        let f = SetFunction::scaled_sum(vec![
            (1.0, SetFunction::sqrt_modular(vec![1.0, 1.0]).unwrap()),
            (-(2f64.sqrt() - 1.0), SetFunction::modular(vec![1.0, 1.0]).unwrap()),
        ])
        .unwrap();
        assert!(f.tail_gains()[0].abs() < 1e-12);
        assert!(f.singleton_gains()[0] > 0.5);
        assert!((curvature(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_factor_examples() {
        assert_eq!(kappa_factor(5.0, 1.0).unwrap(), 5.0);
        assert_eq!(kappa_factor(5.0, 0.0).unwrap(), 1.0);
        assert!((kappa_factor(2.0, 0.5).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(kappa_factor(0.5, 0.5).is_err());
    }

    #[test]
    fn kappa_factor_monotone() {
        for v in [1.0, 1.5, 2.0, 7.0, 30.0] {
            let mut prev = 0.0;
            for i in 0..=20 {
                let k = kappa_factor(v, i as f64 / 20.0).unwrap();
                assert!(k >= prev - 1e-12);
                prev = k;
            }
        }
        for i in 0..=10 {
            let kappa = i as f64 / 10.0;
            let mut prev = 0.0;
            for v in 1..40 {
                let k = kappa_factor(v as f64, kappa).unwrap();
                assert!(k >= prev - 1e-12);
                prev = k;
            }
        }
    }

    #[test]
    fn lovasz_examples() {
        let f = sqrt_card(2);
        let lv = lovasz(&f, &[0.5, 1.0]).unwrap();
        let expected = 1.0 + 0.5 * (2f64.sqrt() - 1.0);
        assert!((lv.value - expected).abs() < 1e-12);
        assert!((lv.value - 1.20711).abs() < 1e-5);
        assert_eq!(lv.subgradient[1], 1.0);

        let g = SetFunction::concave_over_modular(vec![vec![0, 1], vec![1, 2]], vec![0.2, 0.7, 0.4], 0.5).unwrap();
        for s in all_subsets(3) {
            let x = sets::indicator(&s, 3);
            assert!((lovasz(&g, &x).unwrap().value - g.value(&s)).abs() < 1e-12);
        }
        assert!(lovasz(&g, &[0.1]).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let m = SetFunction::modular(vec![1.0, 2.0, 0.5]).unwrap();
        let b = modular_lower_bound(&m, &[2]).unwrap();
        assert_eq!(b.surrogate.weights(), m.singleton_gains());

        let f = sqrt_card(4);
        let b = modular_lower_bound(&f, &[0, 1, 2, 3]).unwrap();
        for (i, w) in b.surrogate.weights().iter().enumerate() {
            let expected = ((i + 1) as f64).sqrt() - (i as f64).sqrt();
            assert!((w - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_bound_at_empty_anchor() {
        let f = SetFunction::concave_over_modular(vec![vec![0, 1], vec![2]], vec![0.4, 0.9, 0.3], 0.5).unwrap();
        for variant in [UpperVariant::First, UpperVariant::Second] {
            let b = modular_upper_bound(&f, &[], variant).unwrap();
            assert_eq!(b.kind, BoundKind::UpperEmpty);
            assert_eq!(b.surrogate.constant(), 0.0);
            assert_eq!(b.surrogate.weights(), f.singleton_gains());
        }
    }

    #[test]
    fn upper_bound_of_modular_is_exact() {
        let m = SetFunction::modular(vec![0.3, 1.0, 2.5, 0.0]).unwrap();
        for variant in [UpperVariant::First, UpperVariant::Second] {
            let b = modular_upper_bound(&m, &[1, 3], variant).unwrap();
            for s in all_subsets(4) {
                assert!((b.value(&s) - m.value(&s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curve_normalized_examples() {
        let m = SetFunction::modular(vec![1.0, 2.0]).unwrap();
        assert!(matches!(curve_normalized(&m), Err(Error::NotApplicable(_))));

        // curvature 1: normalization is the identity
        let f = SetFunction::sqrt_modular(vec![1.0, 0.0, 2.0]).unwrap();
        assert_eq!(curvature(&f), 1.0);
        let fk = curve_normalized(&f).unwrap();
        for s in all_subsets(3) {
            assert!((fk.value(&s) - f.value(&s)).abs() < 1e-12);
        }

        // f = 0.5 (sqrt|X| + |X|) on n = 4: κ = (sqrt3 - 1)/2 and
        // f^κ(X) = [0.5 sqrt|X| - 0.5 (2 - sqrt3) |X|] / κ by hand.
        let f = SetFunction::scaled_sum(vec![
            (0.5, sqrt_card(4)),
            (0.5, SetFunction::modular(vec![1.0; 4]).unwrap()),
        ])
        .unwrap();
        let kappa = curvature(&f);
        assert!((kappa - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        let fk = curve_normalized(&f).unwrap();
        for s in all_subsets(4) {
            let c = s.len() as f64;
            let expected = (0.5 * c.sqrt() - 0.5 * (2.0 - 3f64.sqrt()) * c) / kappa;
            assert!((fk.value(&s) - expected).abs() < 1e-12);
        }
        // the normalized function is fully curved
        assert!((curvature(&fk) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ea_examples() {
        let f = SetFunction::sqrt_modular(vec![0.5, 2.0, 1.0]).unwrap();
        let ea = ea_surrogate(&f, &EaProvider::ExactSqrt).unwrap();
        assert_eq!(ea.weights, vec![0.5, 2.0, 1.0]);
        for s in all_subsets(3) {
            assert!((ea.lower.value(&s) - f.value(&s)).abs() < 1e-12);
        }

        let g = SetFunction::concave_over_modular(vec![vec![0, 1], vec![1, 2]], vec![0.2, 0.7, 0.4], 0.5).unwrap();
        assert!(matches!(
            ea_surrogate(&g, &EaProvider::ExactSqrt),
            Err(Error::NotApplicable(_))
        ));
        let zero = ea_surrogate(&g, &EaProvider::UserWeights(vec![0.0; 3])).unwrap();
        for s in all_subsets(3) {
            assert_eq!(zero.lower.value(&s), 0.0);
            assert!(zero.combined.value(&s) <= g.value(&s) + 1e-12);
        }
        assert!(ea_surrogate(&g, &EaProvider::UserWeights(vec![1.0])).is_err());
    }
}
