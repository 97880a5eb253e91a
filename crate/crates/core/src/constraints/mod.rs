//! Combinatorial constraint families and their oracles.
//!
//! Every [`Constraint`] answers four questions: the cheapest feasible set
//! under nonnegative linear costs, exact membership, whether a set contains a
//! feasible subset (membership in the monotone closure), and the covering
//! description of the closure used by the continuous relaxation.

mod cover;
mod covering;

pub use cover::EXACT_COVER_LIMIT;
pub use covering::{CoverRow, CoveringFamily, ImplicitFamily, Violation, SEPARATION_TOL};

use crate::error::{Error, Result};
use crate::graph::{self, FlowNetwork, Graph};
use crate::sets;
use cover::CoverSystem;

/// Scale applied to costs before the integral max-flow used for cuts.
pub const CUT_COST_SCALE: f64 = 1e6;

/// Costs below this are treated as exactly zero (roundoff from surrogates).
const NEGATIVE_COST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// `|X| >= k`.
    CardinalityAtLeast {
        n: usize,
        k: usize,
    },
    SpanningTree(Graph),
    PerfectBipartiteMatching(Graph),
    StPath(Graph),
    StCut(Graph),
    /// Ground set = vertices.
    VertexCover(Graph),
    EdgeCover(Graph),
    /// Ground set = the covering sets.
    SetCover {
        universe: usize,
        sets: Vec<Vec<usize>>,
    },
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::CardinalityAtLeast { .. } => "cardinality",
            ConstraintKind::SpanningTree(_) => "spanning-tree",
            ConstraintKind::PerfectBipartiteMatching(_) => "matching",
            ConstraintKind::StPath(_) => "st-path",
            ConstraintKind::StCut(_) => "st-cut",
            ConstraintKind::VertexCover(_) => "vertex-cover",
            ConstraintKind::EdgeCover(_) => "edge-cover",
            ConstraintKind::SetCover { .. } => "set-cover",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub set: Vec<usize>,
    pub cost: f64,
    /// Approximation factor of the method used; 1 when exact.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    kind: ConstraintKind,
    n: usize,
    cover: Option<CoverSystem>,
}

impl Constraint {
    pub fn new(kind: ConstraintKind) -> Result<Self> {
        let (n, cover) = match &kind {
            ConstraintKind::CardinalityAtLeast { n, k } => {
                if *n == 0 || k > n {
                    return Err(Error::InvalidArgument(format!(
                        "cardinality bound {k} infeasible on {n} elements"
                    )));
                }
                (*n, None)
            }
            ConstraintKind::SpanningTree(g) => (g.edge_count(), None),
            ConstraintKind::PerfectBipartiteMatching(g) => {
                let left = g
                    .left_size()
                    .ok_or_else(|| Error::InvalidGraph("matching constraint needs a bipartition".into()))?;
                if 2 * left != g.vertices() {
                    return Err(Error::InvalidGraph("perfect matching needs equally sized sides".into()));
                }
                (g.edge_count(), None)
            }
            ConstraintKind::StPath(g) | ConstraintKind::StCut(g) => {
                if g.terminals().is_none() {
                    return Err(Error::InvalidGraph("s-t constraint needs terminals".into()));
                }
                (g.edge_count(), None)
            }
            ConstraintKind::VertexCover(g) => {
                let sets = g.incidence();
                (g.vertices(), Some(CoverSystem::new(g.edge_count(), sets)))
            }
            ConstraintKind::EdgeCover(g) => {
                let sets = g.edges().iter().map(|&(u, v)| vec![u, v]).collect();
                (g.edge_count(), Some(CoverSystem::new(g.vertices(), sets)))
            }
            ConstraintKind::SetCover { universe, sets } => {
                for s in sets {
                    sets::validate(s, *universe)?;
                }
                (sets.len(), Some(CoverSystem::new(*universe, sets.clone())))
            }
        };
        if n == 0 {
            return Err(Error::InvalidArgument("constraint has an empty ground set".into()));
        }
        let c = Self { kind, n, cover };
        c.linear_minimize(&vec![1.0; n])?;
        Ok(c)
    }

    pub fn cardinality_at_least(n: usize, k: usize) -> Result<Self> {
        Self::new(ConstraintKind::CardinalityAtLeast { n, k })
    }

    pub fn spanning_tree(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::SpanningTree(g))
    }

    pub fn perfect_matching(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::PerfectBipartiteMatching(g))
    }

    pub fn st_path(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::StPath(g))
    }

    pub fn st_cut(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::StCut(g))
    }

    pub fn vertex_cover(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::VertexCover(g))
    }

    pub fn edge_cover(g: Graph) -> Result<Self> {
        Self::new(ConstraintKind::EdgeCover(g))
    }

    pub fn set_cover(universe: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(ConstraintKind::SetCover { universe, sets })
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    /// Ground set size.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.kind {
            ConstraintKind::SpanningTree(g)
            | ConstraintKind::PerfectBipartiteMatching(g)
            | ConstraintKind::StPath(g)
            | ConstraintKind::StCut(g)
            | ConstraintKind::VertexCover(g)
            | ConstraintKind::EdgeCover(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_matching(&self) -> bool {
        matches!(self.kind, ConstraintKind::PerfectBipartiteMatching(_))
    }

    /// Feasible set minimizing `Σ costs` (exact except for large covers).
    pub fn linear_minimize(&self, costs: &[f64]) -> Result<LinearSolution> {
        self.linear_minimize_within(costs, &vec![true; self.n])
    }

    /// As [`linear_minimize`](Self::linear_minimize), using only elements with
    /// `allowed[j]`.
    pub fn linear_minimize_within(&self, costs: &[f64], allowed: &[bool]) -> Result<LinearSolution> {
        let costs = self.checked_costs(costs)?;
        if allowed.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: allowed.len(),
            });
        }
        let (set, beta) = match &self.kind {
            ConstraintKind::CardinalityAtLeast { k, .. } => {
                let mut order: Vec<usize> = (0..self.n).filter(|&j| allowed[j]).collect();
                if order.len() < *k {
                    return Err(Error::Infeasible);
                }
                order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
                order.truncate(*k);
                (order, 1.0)
            }
            ConstraintKind::SpanningTree(g) => (graph::kruskal(g, &costs, allowed).ok_or(Error::Infeasible)?, 1.0),
            ConstraintKind::PerfectBipartiteMatching(g) => (min_cost_matching(g, &costs, allowed)?, 1.0),
            ConstraintKind::StPath(g) => {
                let (s, t) = g.terminals().expect("validated");
                let (_, path) = graph::shortest_path(g, &costs, allowed, s, t).ok_or(Error::Infeasible)?;
                (path, 1.0)
            }
            ConstraintKind::StCut(g) => (min_cut(g, &costs, allowed)?, 1.0),
            ConstraintKind::VertexCover(_) | ConstraintKind::EdgeCover(_) | ConstraintKind::SetCover { .. } => {
                let sys = self.cover.as_ref().expect("cover system built");
                sys.solve(&costs, allowed).ok_or(Error::Infeasible)?
            }
        };
        let mut set = set;
        set.sort_unstable();
        let cost = set.iter().map(|&j| costs[j]).sum();
        Ok(LinearSolution { set, cost, beta })
    }

    fn checked_costs(&self, costs: &[f64]) -> Result<Vec<f64>> {
        if costs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: costs.len(),
            });
        }
        costs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if !c.is_finite() || c < -NEGATIVE_COST_TOL {
                    Err(Error::NegativeCost { index: j, cost: c })
                } else {
                    Ok(c.max(0.0))
                }
            })
            .collect()
    }

    /// Exact membership `S ∈ C`.
    pub fn is_feasible(&self, set: &[usize]) -> bool {
        if sets::validate(set, self.n).is_err() {
            return false;
        }
        let inside = sets::mask(set, self.n);
        match &self.kind {
            ConstraintKind::CardinalityAtLeast { k, .. } => set.len() >= *k,
            ConstraintKind::SpanningTree(g) => {
                set.len() + 1 == g.vertices() && graph::components(g, &inside).count() == 1
            }
            ConstraintKind::PerfectBipartiteMatching(g) => {
                let mut degree = vec![0usize; g.vertices()];
                for &e in set {
                    let (u, v) = g.edges()[e];
                    degree[u] += 1;
                    degree[v] += 1;
                }
                degree.iter().all(|&d| d == 1)
            }
            ConstraintKind::StPath(g) => is_simple_path(g, set, &inside),
            ConstraintKind::StCut(g) => separates(g, &inside),
            ConstraintKind::VertexCover(_) | ConstraintKind::EdgeCover(_) | ConstraintKind::SetCover { .. } => {
                self.cover.as_ref().expect("cover system").covers(&inside)
            }
        }
    }

    /// True iff some subset of `S` is feasible.
    pub fn contains_feasible(&self, set: &[usize]) -> bool {
        if sets::validate(set, self.n).is_err() {
            return false;
        }
        let inside = sets::mask(set, self.n);
        self.closure_contains(&inside)
    }

    pub(crate) fn closure_contains(&self, inside: &[bool]) -> bool {
        match &self.kind {
            ConstraintKind::CardinalityAtLeast { k, .. } => inside.iter().filter(|&&b| b).count() >= *k,
            ConstraintKind::SpanningTree(g) => graph::components(g, inside).count() == 1,
            ConstraintKind::PerfectBipartiteMatching(g) => {
                let left = g.left_size().expect("validated");
                let mut adj = vec![Vec::new(); left];
                for (e, &(u, v)) in g.edges().iter().enumerate() {
                    if inside[e] {
                        let (a, b) = if u < left { (u, v) } else { (v, u) };
                        adj[a].push(b - left);
                    }
                }
                graph::max_bipartite_matching(&adj, left) == left
            }
            ConstraintKind::StPath(g) => {
                let (s, t) = g.terminals().expect("validated");
                let mut dsu = graph::components(g, inside);
                dsu.find(s) == dsu.find(t)
            }
            ConstraintKind::StCut(g) => separates(g, inside),
            ConstraintKind::VertexCover(_) | ConstraintKind::EdgeCover(_) | ConstraintKind::SetCover { .. } => {
                self.cover.as_ref().expect("cover system").covers(inside)
            }
        }
    }

    /// Covering description `{x ∈ [0,1]^n : x(W) >= b_W}` of the monotone
    /// closure, explicit where small and via a separation oracle otherwise.
    pub fn covering_family(&self) -> CoveringFamily {
        match &self.kind {
            ConstraintKind::CardinalityAtLeast { n, k } => CoveringFamily::Explicit(vec![CoverRow {
                members: (0..*n).collect(),
                demand: *k,
            }]),
            ConstraintKind::SpanningTree(g) => CoveringFamily::Implicit(ImplicitFamily::GraphicRank(g.clone())),
            ConstraintKind::PerfectBipartiteMatching(g) => {
                CoveringFamily::Implicit(ImplicitFamily::MatchingHall(g.clone()))
            }
            ConstraintKind::StPath(g) => CoveringFamily::Implicit(ImplicitFamily::StCuts(g.clone())),
            ConstraintKind::StCut(g) => CoveringFamily::Implicit(ImplicitFamily::StPaths(g.clone())),
            ConstraintKind::VertexCover(_) | ConstraintKind::EdgeCover(_) | ConstraintKind::SetCover { .. } => {
                let sys = self.cover.as_ref().expect("cover system");
                CoveringFamily::Explicit(
                    sys.covered_by()
                        .iter()
                        .map(|by| CoverRow {
                            members: by.clone(),
                            demand: 1,
                        })
                        .collect(),
                )
            }
        }
    }
}

fn min_cost_matching(g: &Graph, costs: &[f64], allowed: &[bool]) -> Result<Vec<usize>> {
    let left = g.left_size().expect("validated");
    // cheapest allowed edge per (left, right) cell; parallel edges tie to the lower index
    let mut cell: Vec<Vec<Option<(f64, usize)>>> = vec![vec![None; left]; left];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if !allowed[e] {
            continue;
        }
        let (a, b) = if u < left { (u, v - left) } else { (v, u - left) };
        if cell[a][b].is_none_or(|(c, _)| costs[e] < c) {
            cell[a][b] = Some((costs[e], e));
        }
    }
    let matrix: Vec<Vec<Option<f64>>> = cell
        .iter()
        .map(|row| row.iter().map(|c| c.map(|(cost, _)| cost)).collect())
        .collect();
    let assignment = graph::hungarian(&matrix).ok_or(Error::Infeasible)?;
    Ok(assignment
        .iter()
        .enumerate()
        .map(|(a, &b)| cell[a][b].expect("assigned cell allowed").1)
        .collect())
}

fn min_cut(g: &Graph, costs: &[f64], allowed: &[bool]) -> Result<Vec<usize>> {
    let (s, t) = g.terminals().expect("validated");
    let scaled: Vec<i64> = costs
        .iter()
        .map(|&c| (c * CUT_COST_SCALE).round().min(1e12) as i64)
        .collect();
    // any cut through a disallowed edge costs more than all allowed edges together
    let uncuttable = 1
        + (0..g.edge_count())
            .filter(|&e| allowed[e])
            .map(|e| scaled[e])
            .sum::<i64>();
    let mut net = FlowNetwork::<i64>::new(g.vertices());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        net.add_undirected(u, v, if allowed[e] { scaled[e] } else { uncuttable });
    }
    let (flow, side) = net.max_flow(s, t);
    if flow >= uncuttable {
        return Err(Error::Infeasible);
    }
    let cut: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| side[u] != side[v])
        .map(|(e, _)| e)
        .collect();
    if cut.iter().any(|&e| !allowed[e]) {
        return Err(Error::Infeasible);
    }
    Ok(cut)
}

/// True when removing the edges in `removed` disconnects `s` from `t`.
fn separates(g: &Graph, removed: &[bool]) -> bool {
    let (s, t) = g.terminals().expect("validated");
    let keep: Vec<bool> = removed.iter().map(|&r| !r).collect();
    let mut dsu = graph::components(g, &keep);
    dsu.find(s) != dsu.find(t)
}

fn is_simple_path(g: &Graph, set: &[usize], inside: &[bool]) -> bool {
    let (s, t) = g.terminals().expect("validated");
    let mut degree = vec![0usize; g.vertices()];
    for &e in set {
        let (u, v) = g.edges()[e];
        degree[u] += 1;
        degree[v] += 1;
    }
    if degree[s] != 1 || degree[t] != 1 {
        return false;
    }
    if (0..g.vertices()).any(|v| v != s && v != t && degree[v] != 0 && degree[v] != 2) {
        return false;
    }
    let mut dsu = graph::components(g, inside);
    let root = dsu.find(s);
    dsu.find(t) == root && set.iter().all(|&e| dsu.find(g.edges()[e].0) == root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::complete(3).unwrap()
    }

    fn s_a_t() -> Graph {
        Graph::new(3, vec![(0, 1), (1, 2)])
            .unwrap()
            .with_terminals(0, 2)
            .unwrap()
    }

    #[test]
    fn cardinality_examples() {
        let c = Constraint::cardinality_at_least(3, 2).unwrap();
        assert_eq!(c.linear_minimize(&[3.0, 1.0, 2.0]).unwrap().set, vec![1, 2]);
        assert!(!c.is_feasible(&[0]));
        assert!(c.is_feasible(&[0, 2]));
        assert!(Constraint::cardinality_at_least(2, 3).is_err());
    }

    #[test]
    fn spanning_tree_examples() {
        let c = Constraint::spanning_tree(triangle()).unwrap();
        let sol = c.linear_minimize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.set, vec![0, 1]);
        assert_eq!(sol.cost, 3.0);
        assert!(c.contains_feasible(&[0, 1, 2]));
        assert!(!c.is_feasible(&[0, 1, 2]));
        let disconnected = Graph::new(3, vec![(0, 1)]).unwrap();
        assert_eq!(Constraint::spanning_tree(disconnected), Err(Error::Infeasible));
    }

    #[test]
    fn matching_examples() {
        let c = Constraint::perfect_matching(Graph::complete_bipartite(2).unwrap()).unwrap();
        assert!(!c.is_feasible(&[0]));
        assert!(c.is_feasible(&[0, 3]));
        assert!(c.is_feasible(&[1, 2]));
        assert!(!c.is_feasible(&[0, 1]));
        let c3 = Constraint::perfect_matching(Graph::complete_bipartite(3).unwrap()).unwrap();
        let mut costs = vec![1.0; 9];
        for i in 0..3 {
            costs[i * 3 + i] = 0.1;
        }
        assert_eq!(c3.linear_minimize(&costs).unwrap().set, vec![0, 4, 8]);
    }

    #[test]
    fn path_examples() {
        let c = Constraint::st_path(s_a_t()).unwrap();
        assert!(c.is_feasible(&[0, 1]));
        assert!(!c.is_feasible(&[0]));
        // a path plus a detached cycle is not a path
        let g = Graph::new(6, vec![(0, 1), (3, 4), (4, 5), (5, 3)])
            .unwrap()
            .with_terminals(0, 1)
            .unwrap();
        let c = Constraint::st_path(g).unwrap();
        assert!(c.is_feasible(&[0]));
        assert!(!c.is_feasible(&[0, 1, 2, 3]));
        assert!(c.contains_feasible(&[0, 1, 2, 3]));
    }

    #[test]
    fn cut_examples() {
        let g = Graph::new(4, vec![(0, 1), (0, 2), (1, 3), (2, 3)])
            .unwrap()
            .with_terminals(0, 3)
            .unwrap();
        let c = Constraint::st_cut(g).unwrap();
        assert!(c.contains_feasible(&[0, 1]));
        assert!(c.is_feasible(&[0, 3]));
        assert!(!c.is_feasible(&[0]));
        let sol = c.linear_minimize(&[5.0, 1.0, 1.0, 5.0]).unwrap();
        assert_eq!(sol.set, vec![1, 2]);
        assert_eq!(sol.cost, 2.0);
    }

    #[test]
    fn cover_examples() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let vc = Constraint::vertex_cover(g.clone()).unwrap();
        assert_eq!(vc.linear_minimize(&[1.0, 1.5, 1.0]).unwrap().set, vec![1]);
        assert!(vc.is_feasible(&[0, 2]));
        assert!(!vc.is_feasible(&[0]));
        let ec = Constraint::edge_cover(g).unwrap();
        assert!(ec.is_feasible(&[0, 1]));
        assert!(!ec.is_feasible(&[0]));
        let sc = Constraint::set_cover(3, vec![vec![0, 1], vec![2], vec![0, 1, 2]]).unwrap();
        assert_eq!(sc.linear_minimize(&[1.0, 1.0, 1.5]).unwrap().set, vec![2]);
        assert!(Constraint::set_cover(3, vec![vec![0]]).is_err());
    }

    #[test]
    fn rejects_negative_costs() {
        let c = Constraint::cardinality_at_least(2, 1).unwrap();
        assert!(matches!(
            c.linear_minimize(&[-1.0, 0.0]),
            Err(Error::NegativeCost { index: 0, .. })
        ));
    }

    #[test]
    fn restricted_minimization() {
        let c = Constraint::spanning_tree(triangle()).unwrap();
        let sol = c
            .linear_minimize_within(&[1.0, 1.0, 1.0], &[false, true, true])
            .unwrap();
        assert_eq!(sol.set, vec![1, 2]);
    }
}
