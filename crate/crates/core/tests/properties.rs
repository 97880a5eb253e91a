mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use robsub::bounds::{
    curvature, curve_normalized, ea_surrogate, kappa_factor, lovasz, modular_lower_bound, modular_upper_bound,
    EaProvider, UpperVariant,
};
use robsub::oracle::{brute_force_min, enumerate_feasible, EnumerationBudget};
use robsub::robust_modular::AffineFamily;
use robsub::{sets, ModularFunction, RobustObjective, SetFunction};

const TOL: f64 = 1e-9;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << n).map(move |b| sets::from_bits(b, n))
}

/// A random monotone submodular function of one of the supported shapes.
fn random_function(rng: &mut ChaCha8Rng, n: usize) -> SetFunction {
    let weights = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(0.0..1.0)).collect() };
    match rng.random_range(0..4) {
        0 => SetFunction::modular(weights(rng)).unwrap(),
        1 => SetFunction::sqrt_modular(weights(rng)).unwrap(),
        2 => {
            let k = rng.random_range(1..=n.min(4));
            let mut clusters = vec![Vec::new(); k];
            for j in 0..n {
                clusters[rng.random_range(0..k)].push(j);
            }
            clusters.retain(|c| !c.is_empty());
            let p = rng.random_range(0.2..=1.0);
            SetFunction::concave_over_modular(clusters, weights(rng), p).unwrap()
        }
        _ => SetFunction::scaled_sum(vec![
            (
                rng.random_range(0.1..2.0),
                SetFunction::sqrt_modular(weights(rng)).unwrap(),
            ),
            (rng.random_range(0.0..1.0), SetFunction::modular(weights(rng)).unwrap()),
        ])
        .unwrap(),
    }
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    sets::from_bits(rng.random_range(0u64..1 << n), n)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.2) {
                rng.random_range(0..2) as f64
            } else {
                rng.random_range(0.0..1.0)
            }
        })
        .collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|j| b.contains(j)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn submodular_and_monotone(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        let all: Vec<Vec<usize>> = subsets(n).collect();
        let values: Vec<f64> = all.iter().map(|s| f.value(s)).collect();
        for (a, s) in all.iter().enumerate() {
            for (b, t) in all.iter().enumerate().skip(a) {
                let lhs = values[a] + values[b];
                let rhs = f.value(&union(s, t)) + f.value(&intersection(s, t));
                prop_assert!(lhs + TOL >= rhs);
            }
            for j in (0..n).filter(|j| !s.contains(j)) {
                prop_assert!(f.gain(j, s).unwrap() >= -TOL);
            }
        }
    }

    #[test]
    fn curve_normalization_stays_monotone_submodular(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        prop_assume!(curvature(&f) > 1e-6);
        let g = curve_normalized(&f).unwrap();
        for s in subsets(n) {
            for j in (0..n).filter(|j| !s.contains(j)) {
                let gain = g.gain(j, &s).unwrap();
                prop_assert!(gain >= -1e-7);
                for k in (0..n).filter(|k| *k != j && !s.contains(k)) {
                    let bigger = union(&s, &[k]);
                    prop_assert!(gain + 1e-7 >= g.gain(j, &bigger).unwrap());
                }
            }
        }
    }

    #[test]
    fn lovasz_extension_properties(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        let s = random_set(&mut rng, n);
        prop_assert_eq!(lovasz(&f, &sets::indicator(&s, n)).unwrap().value, f.value(&s));
        let (x, y) = (random_point(&mut rng, n), random_point(&mut rng, n));
        let lx = lovasz(&f, &x).unwrap();
        let ly = lovasz(&f, &y).unwrap();
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        prop_assert!(lovasz(&f, &mid).unwrap().value <= 0.5 * (lx.value + ly.value) + TOL);
        let lambda = rng.random_range(0.0..3.0);
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let homogeneous = lovasz(&f, &scaled).unwrap().value - f.empty_value();
        prop_assert!((homogeneous - lambda * (lx.value - f.empty_value())).abs() <= TOL);
        let linear = lx.value + lx.subgradient.iter().zip(y.iter().zip(&x)).map(|(g, (b, a))| g * (b - a)).sum::<f64>();
        prop_assert!(ly.value >= linear - TOL);
    }

    #[test]
    fn modular_bounds_dominate_and_are_tight(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        let anchor = random_set(&mut rng, n);
        let lower = modular_lower_bound(&f, &anchor).unwrap();
        let ups = [
            modular_upper_bound(&f, &anchor, UpperVariant::First).unwrap(),
            modular_upper_bound(&f, &anchor, UpperVariant::Second).unwrap(),
        ];
        prop_assert!((lower.value(&anchor) - f.value(&anchor)).abs() <= TOL);
        for up in &ups {
            prop_assert!((up.value(&anchor) - f.value(&anchor)).abs() <= TOL);
        }
        for s in subsets(n) {
            let v = f.value(&s);
            prop_assert!(lower.value(&s) <= v + TOL);
            for up in &ups {
                prop_assert!(up.value(&s) + TOL >= v);
            }
        }
    }

    #[test]
    fn empty_anchor_bound_is_within_curvature_factor(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        let kappa = curvature(&f);
        let m = modular_upper_bound(&f, &[], UpperVariant::First).unwrap();
        for s in subsets(n).filter(|s| !s.is_empty()) {
            let k = kappa_factor(s.len() as f64, kappa).unwrap();
            prop_assert!(m.value(&s) <= k * f.value(&s) + TOL);
        }
    }

    #[test]
    fn kappa_factor_is_monotone(v in 1.0f64..50.0, dv in 0.0f64..10.0, k in 0.0f64..=1.0, dk in 0.0f64..=1.0) {
        let k2 = (k + dk).min(1.0);
        let base = kappa_factor(v, k).unwrap();
        prop_assert!(kappa_factor(v + dv, k).unwrap() + TOL >= base);
        prop_assert!(kappa_factor(v, k2).unwrap() + TOL >= base);
        prop_assert!((1.0 - TOL..=v + TOL).contains(&base));
    }

    #[test]
    fn ea_lower_bound(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = common::rng(seed);
        let f = random_function(&mut rng, n);
        let s = ea_surrogate(&f, &EaProvider::GainSquared).unwrap();
        for x in subsets(n) {
            prop_assert!(s.lower.value(&x) <= f.value(&x) + TOL);
        }
    }

    #[test]
    fn average_and_max_sandwich_the_worst_case(seed in any::<u64>(), n in 1usize..=8, l in 1usize..=4) {
        let mut rng = common::rng(seed);
        let fs: Vec<SetFunction> = (0..l).map(|_| random_function(&mut rng, n)).collect();
        let obj = RobustObjective::new(fs).unwrap();
        let avg = obj.average();
        let lf = l as f64;
        for s in subsets(n) {
            let (a, m) = (avg.value(&s), obj.value(&s));
            prop_assert!(a <= m + TOL && m <= lf * a + TOL);
        }
    }

    #[test]
    fn affine_surrogate_sandwiches(seed in any::<u64>(), n in 1usize..=8, l in 1usize..=4) {
        let mut rng = common::rng(seed);
        let members: Vec<ModularFunction> = (0..l)
            .map(|_| {
                let w = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
                ModularFunction::with_constant(w, rng.random_range(0.0..0.5)).unwrap()
            })
            .collect();
        let fam = AffineFamily::new(members).unwrap();
        let (avg, max) = (fam.avg_surrogate(), fam.max_surrogate());
        let lf = l as f64;
        for s in subsets(n) {
            let f = fam.value(&s);
            prop_assert!(avg.value(&s) <= f + TOL && f <= lf * avg.value(&s) + TOL);
            prop_assert!(f <= max.value(&s) + TOL && max.value(&s) <= lf * f + TOL);
            for a in [1u32, 2, 3, 64] {
                let p = fam.power_mean_value(a, &s).unwrap();
                prop_assert!(f <= p + TOL && p <= lf.powf(1.0 / a as f64) * f + TOL);
            }
        }
    }

    #[test]
    fn oracle_is_consistent(seed in any::<u64>(), family in 0usize..6, l in 1usize..=3) {
        let mut rng = common::rng(seed);
        let inst = (common::FAMILIES[family].1)(&mut rng, l);
        let c = inst.constraint();
        let listed: Vec<Vec<usize>> = enumerate_feasible(c, EnumerationBudget::default())
            .unwrap()
            .map(|s| s.unwrap())
            .collect();
        let mut unique = listed.clone();
        unique.sort();
        unique.dedup();
        prop_assert_eq!(unique.len(), listed.len());
        prop_assert!(listed.iter().all(|s| c.is_feasible(s)));
        if c.n() <= 10 {
            let brute = subsets(c.n()).filter(|s| c.is_feasible(s)).count();
            prop_assert_eq!(brute, listed.len());
        }
        let (best, value) = brute_force_min(&inst, EnumerationBudget::default()).unwrap();
        prop_assert!(c.is_feasible(&best));
        prop_assert!(listed.iter().all(|s| inst.value(s) + TOL >= value));
    }
}
