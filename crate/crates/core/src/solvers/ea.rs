use super::{Algorithm, RobustInstance, SolveReport};
use crate::bounds::{ea_surrogate, EaProvider, EaSurrogate};
use crate::error::Result;
use crate::function::{ModularFunction, SetFunction};
use crate::graduated::GaConfig;
use crate::robust_modular::{solve_robust_min_with, AffineFamily, Strategy};

#[derive(Debug, Clone, PartialEq)]
pub struct EaOptions {
    /// `None` picks exact-sqrt when every function is a square root of a
    /// modular function, and gain-squared otherwise.
    pub provider: Option<EaProvider>,
    pub strategies: Vec<Strategy>,
    pub ga: GaConfig,
}

impl Default for EaOptions {
    fn default() -> Self {
        Self {
            provider: None,
            strategies: Strategy::LINEAR.to_vec(),
            ga: GaConfig::default(),
        }
    }
}

impl EaOptions {
    pub fn provider_for(&self, functions: &[SetFunction]) -> EaProvider {
        match &self.provider {
            Some(p) => p.clone(),
            None if functions.iter().all(|f| f.sqrt_modular_weights().is_some()) => EaProvider::ExactSqrt,
            None => EaProvider::GainSquared,
        }
    }
}

/// Weights of the linear problem standing in for `f`: the squared surrogate
/// weights, or the singleton values when `f` is modular and the surrogate is
/// `f` itself.
pub(super) fn linear_weights(s: &EaSurrogate, f: &SetFunction) -> Vec<f64> {
    if s.curvature <= 1e-12 {
        f.singleton_gains().to_vec()
    } else {
        s.weights.clone()
    }
}

/// Ellipsoidal reduction: replace each `f_i` by `sqrt(w_i(X))`, solve the
/// linear min-max over the `w_i`, and rank the candidates by the
/// curvature-mixed surrogates.
pub fn ea(inst: &RobustInstance, opts: &EaOptions) -> Result<SolveReport> {
    let provider = opts.provider_for(inst.objective().functions());
    let surrogates = inst
        .objective()
        .functions()
        .iter()
        .map(|f| ea_surrogate(f, &provider))
        .collect::<Result<Vec<_>>>()?;
    let fam = AffineFamily::new(
        surrogates
            .iter()
            .zip(inst.objective().functions())
            .map(|(s, f)| ModularFunction::new(linear_weights(s, f)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let c = inst.constraint();
    let mut best: Option<(f64, Vec<usize>, f64)> = None;
    for &strategy in &opts.strategies {
        let sol = solve_robust_min_with(&fam, c, &[strategy], &opts.ga)?;
        let ranked = surrogates
            .iter()
            .map(|s| s.combined.value(&sol.set))
            .fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|(r, _, _)| ranked < *r) {
            best = Some((ranked, sol.set, sol.beta));
        }
    }
    let (_, set, beta) = best.expect("at least one strategy");
    let mut report = SolveReport::new(Algorithm::Ea, inst, set);
    report.iterations = 1;
    report.beta = beta;
    if provider == EaProvider::ExactSqrt {
        // min-max over w_i is within lβ, and the square root halves the exponent
        report.factor = Some((inst.l() as f64 * beta).sqrt());
    }
    Ok(report)
}
