//! Monotone submodular set functions over an indexed ground set.
//!
//! Every [`SetFunction`] caches `f(∅)`, the singleton gains `f(j | ∅)` and the
//! tail gains `f(j | V \ j)` at construction. Curvature, modular bounds and the
//! ellipsoidal surrogates all read from these caches.

use crate::error::{Error, Result};
use crate::sets;

/// Ground set `{0, .., n-1}` with optional unique labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("ground set must be nonempty".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidArgument("ground set must be nonempty".into()));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("ground set labels must be unique".into()));
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self, j: usize) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(j)).map(String::as_str)
    }
}

/// `constant + Σ_{j ∈ S} weights[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularFunction {
    weights: Vec<f64>,
    constant: f64,
}

impl ModularFunction {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_constant(weights, 0.0)
    }

    pub fn with_constant(weights: Vec<f64>, constant: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument(
                "modular function needs at least one weight".into(),
            ));
        }
        if let Some(j) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight {j} is not finite")));
        }
        if !constant.is_finite() {
            return Err(Error::InvalidArgument("constant is not finite".into()));
        }
        Ok(Self { weights, constant })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        self.constant + set.iter().map(|&j| self.weights[j]).sum::<f64>()
    }
}

/// `Σ_i ψ(w(X ∩ C_i))` with `ψ(v) = v^p`, `0 < p ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveOverModular {
    clusters: Vec<Vec<usize>>,
    weights: Vec<f64>,
    exponent: f64,
    membership: Vec<Vec<usize>>,
}

impl ConcaveOverModular {
    pub fn new(clusters: Vec<Vec<usize>>, weights: Vec<f64>, exponent: f64) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidArgument("weights must be nonempty".into()));
        }
        if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {j} must be finite and nonnegative"
            )));
        }
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "concave exponent {exponent} outside (0, 1]"
            )));
        }
        let mut membership = vec![Vec::new(); n];
        for (c, cluster) in clusters.iter().enumerate() {
            sets::validate(cluster, n)?;
            for &j in cluster {
                membership[j].push(c);
            }
        }
        Ok(Self {
            clusters,
            weights,
            exponent,
            membership,
        })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    fn cluster_sums(&self, set: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; self.clusters.len()];
        for &j in set {
            for &c in &self.membership[j] {
                sums[c] += self.weights[j];
            }
        }
        sums
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        self.cluster_sums(set)
            .into_iter()
            .map(|s| concave(s, self.exponent))
            .sum()
    }
}

/// `sqrt(w(X))` for a nonnegative weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtModular {
    weights: Vec<f64>,
}

impl SqrtModular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("weights must be nonempty".into()));
        }
        if let Some(j) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {j} must be finite and nonnegative"
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.weights[j]).sum::<f64>().max(0.0).sqrt()
    }
}

fn concave(v: f64, p: f64) -> f64 {
    let v = v.max(0.0);
    if p == 0.5 {
        v.sqrt()
    } else if p == 1.0 {
        v
    } else {
        v.powf(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    Modular(ModularFunction),
    ConcaveOverModular(ConcaveOverModular),
    SqrtModular(SqrtModular),
    /// `Σ coef_i · f_i`.
    ScaledSum(Vec<(f64, SetFunction)>),
}

/// A set function together with its cached singleton statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFunction {
    kind: FunctionKind,
    n: usize,
    empty_value: f64,
    singleton_gains: Vec<f64>,
    tail_gains: Vec<f64>,
}

impl SetFunction {
    pub fn new(kind: FunctionKind) -> Result<Self> {
        let n = match &kind {
            FunctionKind::Modular(m) => m.len(),
            FunctionKind::ConcaveOverModular(c) => c.weights.len(),
            FunctionKind::SqrtModular(s) => s.weights.len(),
            FunctionKind::ScaledSum(terms) => {
                let Some((_, first)) = terms.first() else {
                    return Err(Error::InvalidArgument("scaled sum needs at least one term".into()));
                };
                let n = first.n;
                for (coef, f) in terms {
                    if f.n != n {
                        return Err(Error::DimensionMismatch { expected: n, got: f.n });
                    }
                    if !coef.is_finite() {
                        return Err(Error::InvalidArgument("scaled sum coefficient not finite".into()));
                    }
                }
                n
            }
        };
        let mut f = Self {
            kind,
            n,
            empty_value: 0.0,
            singleton_gains: Vec::new(),
            tail_gains: Vec::new(),
        };
        f.empty_value = f.value(&[]);
        f.singleton_gains = f.gains_against(&[]);
        let all: Vec<usize> = (0..n).collect();
        f.tail_gains = f.gains_against(&all);
        Ok(f)
    }

    pub fn modular(weights: Vec<f64>) -> Result<Self> {
        Self::new(FunctionKind::Modular(ModularFunction::new(weights)?))
    }

    pub fn concave_over_modular(clusters: Vec<Vec<usize>>, weights: Vec<f64>, exponent: f64) -> Result<Self> {
        Self::new(FunctionKind::ConcaveOverModular(ConcaveOverModular::new(
            clusters, weights, exponent,
        )?))
    }

    pub fn sqrt_modular(weights: Vec<f64>) -> Result<Self> {
        Self::new(FunctionKind::SqrtModular(SqrtModular::new(weights)?))
    }

    pub fn scaled_sum(terms: Vec<(f64, SetFunction)>) -> Result<Self> {
        Self::new(FunctionKind::ScaledSum(terms))
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    /// Ground set size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `f(∅)`.
    pub fn empty_value(&self) -> f64 {
        self.empty_value
    }

    /// `f(j | ∅)` for every `j`.
    pub fn singleton_gains(&self) -> &[f64] {
        &self.singleton_gains
    }

    /// `f(j | V \ j)` for every `j`.
    pub fn tail_gains(&self) -> &[f64] {
        &self.tail_gains
    }

    /// Evaluates `f(S)` after validating `S`.
    pub fn eval(&self, set: &[usize]) -> Result<f64> {
        sets::validate(set, self.n)?;
        Ok(self.value(set))
    }

    /// Evaluates `f(S)` without validation.
    ///
    /// Panics on out-of-range elements; duplicates are counted twice by the
    /// modular parts.
    pub fn value(&self, set: &[usize]) -> f64 {
        match &self.kind {
            FunctionKind::Modular(m) => m.value(set),
            FunctionKind::ConcaveOverModular(c) => c.value(set),
            FunctionKind::SqrtModular(s) => s.value(set),
            FunctionKind::ScaledSum(terms) => terms.iter().map(|(c, f)| c * f.value(set)).sum(),
        }
    }

    /// `f(j | S) = f(S ∪ j) - f(S)`.
    pub fn gain(&self, j: usize, set: &[usize]) -> Result<f64> {
        sets::validate(set, self.n)?;
        if j >= self.n {
            return Err(Error::OutOfRange { index: j, n: self.n });
        }
        if set.contains(&j) {
            return Err(Error::ElementInContext(j));
        }
        let mut with = set.to_vec();
        with.push(j);
        Ok(self.value(&with) - self.value(set))
    }

    /// For every element `j`: `f(j | S \ j)` when `j ∈ S`, otherwise `f(j | S)`.
    ///
    /// `set` must be valid.
    pub fn gains_against(&self, set: &[usize]) -> Vec<f64> {
        match &self.kind {
            FunctionKind::Modular(m) => m.weights.clone(),
            FunctionKind::ConcaveOverModular(c) => {
                let sums = c.cluster_sums(set);
                let member = sets::mask(set, self.n);
                (0..self.n)
                    .map(|j| {
                        let wj = c.weights[j];
                        c.membership[j]
                            .iter()
                            .map(|&k| {
                                let s = sums[k];
                                if member[j] {
                                    concave(s, c.exponent) - concave(s - wj, c.exponent)
                                } else {
                                    concave(s + wj, c.exponent) - concave(s, c.exponent)
                                }
                            })
                            .sum()
                    })
                    .collect()
            }
            FunctionKind::SqrtModular(s) => {
                let total: f64 = set.iter().map(|&j| s.weights[j]).sum();
                let member = sets::mask(set, self.n);
                (0..self.n)
                    .map(|j| {
                        let wj = s.weights[j];
                        if member[j] {
                            total.max(0.0).sqrt() - (total - wj).max(0.0).sqrt()
                        } else {
                            (total + wj).max(0.0).sqrt() - total.max(0.0).sqrt()
                        }
                    })
                    .collect()
            }
            FunctionKind::ScaledSum(terms) => {
                let mut out = vec![0.0; self.n];
                for (coef, f) in terms {
                    for (o, g) in out.iter_mut().zip(f.gains_against(set)) {
                        *o += coef * g;
                    }
                }
                out
            }
        }
    }

    /// `f(S_0), f(S_1), .., f(S_k)` along the chain `S_i = {order[0], .., order[i-1]}`.
    pub fn prefix_values(&self, order: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(order.len() + 1);
        match &self.kind {
            FunctionKind::Modular(m) => {
                let mut acc = m.constant;
                out.push(acc);
                for &j in order {
                    acc += m.weights[j];
                    out.push(acc);
                }
            }
            FunctionKind::ConcaveOverModular(c) => {
                let mut sums = vec![0.0; c.clusters.len()];
                let mut acc = 0.0;
                out.push(acc);
                for &j in order {
                    for &k in &c.membership[j] {
                        let before = concave(sums[k], c.exponent);
                        sums[k] += c.weights[j];
                        acc += concave(sums[k], c.exponent) - before;
                    }
                    out.push(acc);
                }
            }
            FunctionKind::SqrtModular(s) => {
                let mut total = 0.0;
                out.push(0.0);
                for &j in order {
                    total += s.weights[j];
                    out.push(total.max(0.0).sqrt());
                }
            }
            FunctionKind::ScaledSum(terms) => {
                out.resize(order.len() + 1, 0.0);
                for (coef, f) in terms {
                    for (o, v) in out.iter_mut().zip(f.prefix_values(order)) {
                        *o += coef * v;
                    }
                }
            }
        }
        out
    }

    /// Weights `w` with `f = sqrt(w(·))` exactly, if `f` has that form.
    pub fn sqrt_modular_weights(&self) -> Option<Vec<f64>> {
        match &self.kind {
            FunctionKind::SqrtModular(s) => Some(s.weights.clone()),
            FunctionKind::ScaledSum(terms) if terms.len() == 1 && terms[0].0 >= 0.0 => {
                let (coef, f) = &terms[0];
                f.sqrt_modular_weights()
                    .map(|w| w.into_iter().map(|x| coef * coef * x).collect())
            }
            _ => None,
        }
    }

    /// True when the function is affine in the membership vector.
    pub fn is_modular(&self) -> bool {
        match &self.kind {
            FunctionKind::Modular(_) => true,
            FunctionKind::ScaledSum(terms) => terms.iter().all(|(_, f)| f.is_modular()),
            _ => false,
        }
    }
}

impl From<ModularFunction> for SetFunction {
    fn from(m: ModularFunction) -> Self {
        SetFunction::new(FunctionKind::Modular(m)).expect("validated modular function")
    }
}

/// Pointwise maximum of `l ≥ 1` set functions on a shared ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustObjective {
    functions: Vec<SetFunction>,
}

impl RobustObjective {
    pub fn new(functions: Vec<SetFunction>) -> Result<Self> {
        let Some(first) = functions.first() else {
            return Err(Error::InvalidArgument("robust objective needs l >= 1 functions".into()));
        };
        let n = first.n();
        if let Some(f) = functions.iter().find(|f| f.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.n(),
            });
        }
        Ok(Self { functions })
    }

    pub fn functions(&self) -> &[SetFunction] {
        &self.functions
    }

    pub fn l(&self) -> usize {
        self.functions.len()
    }

    pub fn n(&self) -> usize {
        self.functions[0].n()
    }

    pub fn value(&self, set: &[usize]) -> f64 {
        self.worst(set).1
    }

    pub fn eval(&self, set: &[usize]) -> Result<f64> {
        sets::validate(set, self.n())?;
        Ok(self.value(set))
    }

    /// Index and value of the largest `f_i(S)`; ties go to the smallest index.
    pub fn worst(&self, set: &[usize]) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, f) in self.functions.iter().enumerate() {
            let v = f.value(set);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// `f_avg = (1/l) Σ f_i`.
    pub fn average(&self) -> SetFunction {
        let coef = 1.0 / self.l() as f64;
        SetFunction::scaled_sum(self.functions.iter().map(|f| (coef, f.clone())).collect())
            .expect("functions share a ground set")
    }
}
