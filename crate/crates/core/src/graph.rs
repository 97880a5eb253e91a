//! Undirected graphs and the classical combinatorial routines the
//! constraint oracles are built on: union-find, Kruskal, Dijkstra,
//! augmenting-path max-flow, Hungarian assignment and Kuhn matching.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    terminals: Option<(usize, usize)>,
    left_size: Option<usize>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertices == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} ({u}, {v}) has an endpoint outside 0..{vertices}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {e} is a self-loop")));
            }
        }
        Ok(Self {
            vertices,
            edges,
            terminals: None,
            left_size: None,
        })
    }

    pub fn with_terminals(mut self, source: usize, sink: usize) -> Result<Self> {
        if source >= self.vertices || sink >= self.vertices {
            return Err(Error::InvalidGraph("terminal out of range".into()));
        }
        if source == sink {
            return Err(Error::InvalidGraph("source and sink must differ".into()));
        }
        self.terminals = Some((source, sink));
        Ok(self)
    }

    /// Marks vertices `0..left_size` as the left side; every edge must cross.
    pub fn with_bipartition(mut self, left_size: usize) -> Result<Self> {
        if left_size > self.vertices {
            return Err(Error::InvalidGraph("left side larger than the graph".into()));
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if (u < left_size) == (v < left_size) {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} ({u}, {v}) does not cross the bipartition"
                )));
            }
        }
        self.left_size = Some(left_size);
        Ok(self)
    }

    /// Complete bipartite graph `K_{k,k}`; edge `(u, k + v)` has index `u * k + v`.
    pub fn complete_bipartite(k: usize) -> Result<Self> {
        let edges = (0..k).flat_map(|u| (0..k).map(move |v| (u, k + v))).collect();
        Graph::new(2 * k, edges)?.with_bipartition(k)
    }

    /// Complete graph `K_n` with edges in lexicographic order.
    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, edges)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn terminals(&self) -> Option<(usize, usize)> {
        self.terminals
    }

    pub fn left_size(&self) -> Option<usize> {
        self.left_size
    }

    /// Edge indices incident to each vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            inc[u].push(e);
            inc[v].push(e);
        }
        inc
    }
}

#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
    count: usize,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            count: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.count -= 1;
        true
    }

    /// Number of components.
    pub fn count(&self) -> usize {
        self.count
    }
}

/// Components of the subgraph on the edges with `keep[e]`.
pub(crate) fn components(graph: &Graph, keep: &[bool]) -> DisjointSets {
    let mut dsu = DisjointSets::new(graph.vertices());
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        if keep[e] {
            dsu.union(u, v);
        }
    }
    dsu
}

/// Minimum spanning tree over the allowed edges, ties broken by edge index.
pub(crate) fn kruskal(graph: &Graph, costs: &[f64], allowed: &[bool]) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..graph.edge_count()).filter(|&e| allowed[e]).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let mut dsu = DisjointSets::new(graph.vertices());
    let mut tree = Vec::with_capacity(graph.vertices().saturating_sub(1));
    for e in order {
        let (u, v) = graph.edges()[e];
        if dsu.union(u, v) {
            tree.push(e);
        }
    }
    (dsu.count() == 1).then(|| {
        tree.sort_unstable();
        tree
    })
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest `s`–`t` path (edge indices) under nonnegative costs.
pub(crate) fn shortest_path(
    graph: &Graph,
    costs: &[f64],
    allowed: &[bool],
    s: usize,
    t: usize,
) -> Option<(f64, Vec<usize>)> {
    let inc = graph.incidence();
    let mut dist = vec![f64::INFINITY; graph.vertices()];
    let mut via: Vec<Option<usize>> = vec![None; graph.vertices()];
    let mut done = vec![false; graph.vertices()];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(HeapItem { dist: 0.0, vertex: s });
    while let Some(HeapItem { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u == t {
            break;
        }
        for &e in &inc[u] {
            if !allowed[e] {
                continue;
            }
            let (a, b) = graph.edges()[e];
            let w = if a == u { b } else { a };
            let nd = d + costs[e];
            if nd < dist[w] {
                dist[w] = nd;
                via[w] = Some(e);
                heap.push(HeapItem { dist: nd, vertex: w });
            }
        }
    }
    if !done[t] {
        return None;
    }
    let mut path = Vec::new();
    let mut v = t;
    while v != s {
        let e = via[v]?;
        path.push(e);
        let (a, b) = graph.edges()[e];
        v = if a == v { b } else { a };
    }
    path.sort_unstable();
    Some((dist[t], path))
}

pub(crate) trait Capacity: Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> {
    const ZERO: Self;
    fn positive(self) -> bool;
}

impl Capacity for i64 {
    const ZERO: Self = 0;
    fn positive(self) -> bool {
        self > 0
    }
}

impl Capacity for f64 {
    const ZERO: Self = 0.0;
    fn positive(self) -> bool {
        self > 1e-12
    }
}

#[derive(Debug, Clone)]
struct Arc<C> {
    to: usize,
    cap: C,
    rev: usize,
}

/// Edmonds–Karp max-flow on a network with undirected or directed arcs.
#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork<C> {
    adj: Vec<Vec<Arc<C>>>,
}

impl<C: Capacity> FlowNetwork<C> {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: C) {
        let (ru, rv) = (self.adj[v].len(), self.adj[u].len());
        self.adj[u].push(Arc { to: v, cap, rev: ru });
        self.adj[v].push(Arc {
            to: u,
            cap: C::ZERO,
            rev: rv,
        });
    }

    pub fn add_undirected(&mut self, u: usize, v: usize, cap: C) {
        let (ru, rv) = (self.adj[v].len(), self.adj[u].len());
        self.adj[u].push(Arc { to: v, cap, rev: ru });
        self.adj[v].push(Arc { to: u, cap, rev: rv });
    }

    /// Pushes the maximum flow and returns its value and the set of nodes
    /// reachable from `s` in the final residual network.
    pub fn max_flow(&mut self, s: usize, t: usize) -> (C, Vec<bool>) {
        let mut total = C::ZERO;
        loop {
            let mut pred: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for (i, arc) in self.adj[u].iter().enumerate() {
                    if !seen[arc.to] && arc.cap.positive() {
                        seen[arc.to] = true;
                        pred[arc.to] = Some((u, i));
                        queue.push_back(arc.to);
                    }
                }
            }
            if !seen[t] {
                return (total, seen);
            }
            let mut bottleneck: Option<C> = None;
            let mut v = t;
            while let Some((u, i)) = pred[v] {
                let cap = self.adj[u][i].cap;
                bottleneck = Some(match bottleneck {
                    Some(b) if b < cap => b,
                    _ => cap,
                });
                v = u;
            }
            let push = bottleneck.expect("path has at least one arc");
            let mut v = t;
            while let Some((u, i)) = pred[v] {
                let rev = self.adj[u][i].rev;
                self.adj[u][i].cap = self.adj[u][i].cap - push;
                self.adj[v][rev].cap = self.adj[v][rev].cap + push;
                v = u;
            }
            total = total + push;
        }
    }
}

/// Minimum-cost perfect assignment of rows to columns of a square matrix.
///
/// `None` entries are forbidden. Returns `assignment[row] = col`, or `None`
/// if no perfect assignment avoids forbidden cells.
pub(crate) fn hungarian(cost: &[Vec<Option<f64>>]) -> Option<Vec<usize>> {
    let n = cost.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let finite_max = cost.iter().flatten().flatten().fold(0.0f64, |m, &c| m.max(c.abs()));
    let big = (finite_max + 1.0) * (n as f64 + 1.0) * 4.0;
    let at = |i: usize, j: usize| cost[i][j].unwrap_or(big);

    // Potentials formulation with 1-based sentinels.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
    }
    assignment
        .iter()
        .enumerate()
        .all(|(i, &j)| cost[i][j].is_some())
        .then_some(assignment)
}

/// Size of a maximum matching in a bipartite graph given as left adjacency
/// lists over right vertices `0..right`.
pub(crate) fn max_bipartite_matching(adj: &[Vec<usize>], right: usize) -> usize {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], mate: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if mate[v].is_none_or(|w| augment(w, adj, seen, mate)) {
                mate[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut mate = vec![None; right];
    let mut size = 0;
    for u in 0..adj.len() {
        let mut seen = vec![false; right];
        if augment(u, adj, &mut seen, &mut mate) {
            size += 1;
        }
    }
    size
}
