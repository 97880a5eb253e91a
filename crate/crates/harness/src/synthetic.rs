//! Random robust instances and batch solves over seeds.

use crate::config::{ConstraintSpec, Method, ObjectiveKind, SyntheticConfig};
use crate::error::{HarnessError, Result};
use crate::report::{fmt_f64, fmt_opt, fmt_set};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robsub::oracle::{brute_force_min, EnumerationBudget};
use robsub::solvers::{run, SolveOptions};
use robsub::{
    solve_robust_min, AffineFamily, Constraint, FunctionKind, Graph, RobustInstance, RobustObjective, SetFunction,
};
use std::time::Instant;

/// Connected simple graph on `vertices` with exactly `edges` edges: a random
/// spanning tree plus uniformly chosen extra edges, listed in sorted order.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, vertices: usize, edges: usize) -> Result<Graph> {
    let mut order: Vec<usize> = (0..vertices).collect();
    order.shuffle(rng);
    let mut list: Vec<(usize, usize)> = (1..vertices)
        .map(|i| {
            let (a, b) = (order[i], order[rng.random_range(0..i)]);
            (a.min(b), a.max(b))
        })
        .collect();
    let mut pool: Vec<(usize, usize)> = (0..vertices)
        .flat_map(|u| (u + 1..vertices).map(move |v| (u, v)))
        .filter(|e| !list.contains(e))
        .collect();
    pool.shuffle(rng);
    list.extend(pool.into_iter().take(edges.saturating_sub(list.len())));
    list.sort_unstable();
    Ok(Graph::new(vertices, list)?)
}

fn build_constraint(spec: &ConstraintSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<Constraint> {
    let terminals = |g: Graph, v: usize| g.with_terminals(0, v - 1);
    Ok(match *spec {
        ConstraintSpec::Cardinality { k } => Constraint::cardinality_at_least(n, k)?,
        ConstraintSpec::Matching { side } => Constraint::perfect_matching(Graph::complete_bipartite(side)?)?,
        ConstraintSpec::Tree { vertices } => Constraint::spanning_tree(Graph::complete(vertices)?)?,
        ConstraintSpec::Path { vertices, edges } => {
            Constraint::st_path(terminals(random_connected_graph(rng, vertices, edges)?, vertices)?)?
        }
        ConstraintSpec::Cut { vertices, edges } => {
            Constraint::st_cut(terminals(random_connected_graph(rng, vertices, edges)?, vertices)?)?
        }
        ConstraintSpec::VertexCover { vertices, edges } => {
            Constraint::vertex_cover(random_connected_graph(rng, vertices, edges)?)?
        }
        ConstraintSpec::EdgeCover { vertices, edges } => {
            Constraint::edge_cover(random_connected_graph(rng, vertices, edges)?)?
        }
    })
}

/// Uniform random assignment of `n` elements to `k` clusters, empty ones dropped.
pub fn random_clustering(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut clusters = vec![Vec::new(); k];
    for j in 0..n {
        clusters[rng.random_range(0..k)].push(j);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// The instance for one seed. Everything random is drawn from a single
/// ChaCha8 stream seeded with `seed`: the graph, then the weights, then the
/// clusterings.
pub fn generate_instance(cfg: &SyntheticConfig, seed: u64) -> Result<RobustInstance> {
    cfg.validate()?;
    let n = cfg.ground_size()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constraint = build_constraint(&cfg.constraint, n, &mut rng)?;
    let functions = match cfg.objective {
        ObjectiveKind::Cooperative => {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            (0..cfg.l)
                .map(|_| {
                    let clusters = random_clustering(&mut rng, n, cfg.clusters);
                    SetFunction::concave_over_modular(clusters, w.clone(), cfg.exponent)
                })
                .collect::<robsub::Result<Vec<_>>>()?
        }
        ObjectiveKind::Modular => (0..cfg.l)
            .map(|_| SetFunction::modular((0..n).map(|_| rng.random::<f64>()).collect()))
            .collect::<robsub::Result<Vec<_>>>()?,
    };
    Ok(RobustInstance::new(RobustObjective::new(functions)?, constraint)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    /// `None` if the method failed on this instance.
    pub set: Option<Vec<usize>>,
    pub value: Option<f64>,
    pub iterations: usize,
    pub error: Option<String>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub n: usize,
    pub oracle: Option<f64>,
    pub methods: Vec<MethodOutcome>,
}

impl SeedOutcome {
    pub fn value_of(&self, name: &str) -> Option<f64> {
        self.methods
            .iter()
            .find(|m| m.method.name() == name)
            .and_then(|m| m.value)
    }
}

fn modular_family(inst: &RobustInstance) -> robsub::Result<AffineFamily> {
    let members = inst
        .objective()
        .functions()
        .iter()
        .map(|f| match f.kind() {
            FunctionKind::Modular(m) => Ok(m.clone()),
            _ => Err(robsub::Error::NotApplicable(
                "robust-modular strategies need modular functions".into(),
            )),
        })
        .collect::<robsub::Result<Vec<_>>>()?;
    AffineFamily::new(members)
}

fn run_method(inst: &RobustInstance, method: Method, opts: &SolveOptions) -> MethodOutcome {
    let started = Instant::now();
    let result: robsub::Result<(Vec<usize>, usize)> = match method {
        Method::Solver(a) => run(inst, a, opts).map(|r| (r.set, r.iterations)),
        Method::RobustModular(s) => modular_family(inst)
            .and_then(|fam| solve_robust_min(&fam, inst.constraint(), &[s]))
            .map(|sol| (sol.set, 1)),
    };
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok((set, iterations)) => MethodOutcome {
            method,
            value: Some(inst.value(&set)),
            set: Some(set),
            iterations,
            error: None,
            runtime_ms,
        },
        Err(e) => MethodOutcome {
            method,
            set: None,
            value: None,
            iterations: 0,
            error: Some(e.to_string()),
            runtime_ms,
        },
    }
}

/// Solves one seed with every configured method, plus the oracle when
/// requested and within the enumeration budget.
pub fn solve_seed(cfg: &SyntheticConfig, seed: u64, oracle: bool) -> Result<SeedOutcome> {
    let inst = generate_instance(cfg, seed)?;
    let opts = SolveOptions::default();
    let methods: Vec<MethodOutcome> = cfg
        .methods()?
        .into_iter()
        .map(|m| run_method(&inst, m, &opts))
        .collect();
    for m in &methods {
        if let Some(set) = &m.set {
            if !inst.constraint().is_feasible(set) {
                return Err(HarnessError::Solver(robsub::Error::InvalidArgument(format!(
                    "{} returned an infeasible set on seed {seed}",
                    m.method.name()
                ))));
            }
        }
    }
    let budget = EnumerationBudget::default();
    let oracle = if oracle && inst.n() <= budget.max_ground_size {
        Some(brute_force_min(&inst, budget)?.1)
    } else {
        None
    };
    Ok(SeedOutcome {
        seed,
        n: inst.n(),
        oracle,
        methods,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticReport {
    pub seeds: Vec<SeedOutcome>,
}

/// Runs every seed (in parallel) and returns the outcomes in seed-list order.
pub fn run_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticReport> {
    cfg.validate()?;
    let seeds = cfg
        .seeds
        .to_vec()
        .into_par_iter()
        .map(|seed| solve_seed(cfg, seed, cfg.oracle))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticReport { seeds })
}

/// Tolerance for counting a method as tied with the best value.
const WIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub name: &'static str,
    pub solved: usize,
    pub mean_value: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub mean_ratio: Option<f64>,
    /// Fraction of seeds on which the method attains the best value among
    /// the methods run.
    pub win_rate: f64,
    pub mean_runtime_ms: f64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl SyntheticReport {
    /// Number of (seed, method) runs that failed.
    pub fn failures(&self) -> usize {
        self.seeds
            .iter()
            .flat_map(|s| &s.methods)
            .filter(|m| m.error.is_some())
            .count()
    }

    pub fn summaries(&self) -> Vec<MethodSummary> {
        let Some(first) = self.seeds.first() else {
            return Vec::new();
        };
        first
            .methods
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let rows: Vec<(&SeedOutcome, &MethodOutcome)> = self.seeds.iter().map(|s| (s, &s.methods[k])).collect();
                let wins = rows
                    .iter()
                    .filter(|(s, o)| {
                        let best = s.methods.iter().filter_map(|m| m.value).fold(f64::INFINITY, f64::min);
                        o.value.is_some_and(|v| v <= best + WIN_TOL * best.abs().max(1.0))
                    })
                    .count();
                MethodSummary {
                    name: m.method.name(),
                    solved: rows.iter().filter(|(_, o)| o.value.is_some()).count(),
                    mean_value: mean(rows.iter().filter_map(|(_, o)| o.value)),
                    mean_iterations: mean(
                        rows.iter()
                            .filter(|(_, o)| o.value.is_some())
                            .map(|(_, o)| o.iterations as f64),
                    ),
                    mean_ratio: mean(rows.iter().filter_map(|(s, o)| ratio(o.value, s.oracle))),
                    win_rate: wins as f64 / rows.len() as f64,
                    mean_runtime_ms: rows.iter().map(|(_, o)| o.runtime_ms).sum::<f64>() / rows.len() as f64,
                }
            })
            .collect()
    }

    /// CSV with one `run` row per (seed, method) and one `summary` row per
    /// method. `runtime_ms` is appended only when `timing` is set, keeping
    /// the default output byte-stable.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut header = vec![
            "record",
            "seed",
            "algorithm",
            "value",
            "iterations",
            "oracle_value",
            "ratio",
            "win_rate",
            "status",
            "set",
        ];
        if timing {
            header.push("runtime_ms");
        }
        let mut out = header.join(",") + "\n";
        for s in &self.seeds {
            for m in &s.methods {
                let mut row = vec![
                    "run".to_string(),
                    s.seed.to_string(),
                    m.method.name().to_string(),
                    fmt_opt(m.value),
                    if m.value.is_some() {
                        m.iterations.to_string()
                    } else {
                        String::new()
                    },
                    fmt_opt(s.oracle),
                    fmt_opt(ratio(m.value, s.oracle)),
                    String::new(),
                    status(m.error.as_deref()),
                    m.set.as_deref().map(fmt_set).unwrap_or_default(),
                ];
                if timing {
                    row.push(fmt_f64(m.runtime_ms));
                }
                out += &(row.join(",") + "\n");
            }
        }
        for m in self.summaries() {
            let mut row = vec![
                "summary".to_string(),
                String::new(),
                m.name.to_string(),
                fmt_opt(m.mean_value),
                fmt_opt(m.mean_iterations),
                fmt_opt(mean(self.seeds.iter().filter_map(|s| s.oracle))),
                fmt_opt(m.mean_ratio),
                fmt_f64(m.win_rate),
                format!("solved {}/{}", m.solved, self.seeds.len()),
                String::new(),
            ];
            if timing {
                row.push(fmt_f64(m.mean_runtime_ms));
            }
            out += &(row.join(",") + "\n");
        }
        out
    }
}

fn ratio(value: Option<f64>, oracle: Option<f64>) -> Option<f64> {
    match (value, oracle) {
        (Some(v), Some(o)) if o > 0.0 => Some(v / o),
        (Some(v), Some(_)) => Some(if v <= 0.0 { 1.0 } else { f64::INFINITY }),
        _ => None,
    }
}

fn status(error: Option<&str>) -> String {
    match error {
        None => "ok".into(),
        Some(e) => format!("error: {}", e.replace([',', '\n', '"'], " ")),
    }
}
