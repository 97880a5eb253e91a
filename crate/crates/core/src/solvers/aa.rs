use super::{ea::EaOptions, mmin, Algorithm, MminOptions, RobustInstance, SolveReport};
use crate::bounds::EaProvider;
use crate::bounds::{curvature, ea_surrogate};
use crate::error::{Error, Result};
use crate::function::RobustObjective;

#[derive(Debug, Clone, PartialEq)]
pub enum AaInner {
    Mmin(MminOptions),
    Ea(EaOptions),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AaOptions {
    pub inner: AaInner,
}

impl Default for AaOptions {
    fn default() -> Self {
        Self {
            inner: AaInner::Mmin(MminOptions::default()),
        }
    }
}

/// Average approximation: minimize `f_avg = (1/l) Σ f_i` over `C` and report
/// the set under the true worst case.
pub fn solve_aa(inst: &RobustInstance, opts: &AaOptions) -> Result<SolveReport> {
    let avg = inst.objective().average();
    let kappa = curvature(&avg);
    let mut report = match &opts.inner {
        AaInner::Mmin(m) => {
            let single = RobustInstance::new(RobustObjective::new(vec![avg])?, inst.constraint().clone())?;
            let inner = mmin::mmin(&single, m)?;
            let mut r = SolveReport::new(Algorithm::AaMmin, inst, inner.set);
            r.iterations = inner.iterations;
            r.trace = inner.trace;
            r.beta = inner.beta;
            r
        }
        AaInner::Ea(e) => {
            let provider = e.provider_for(std::slice::from_ref(&avg));
            let surrogate = match ea_surrogate(&avg, &provider) {
                Err(Error::NotApplicable(_)) if e.provider.is_none() => ea_surrogate(&avg, &EaProvider::GainSquared)?,
                other => other?,
            };
            let sol = inst
                .constraint()
                .linear_minimize(&super::ea::linear_weights(&surrogate, &avg))?;
            let mut r = SolveReport::new(Algorithm::AaEa, inst, sol.set);
            r.iterations = 1;
            r.beta = sol.beta;
            r
        }
    };
    if matches!(opts.inner, AaInner::Mmin(_)) {
        report.factor = Some(report.beta * inst.curvature_factor(report.set.len(), kappa));
    }
    Ok(report)
}
