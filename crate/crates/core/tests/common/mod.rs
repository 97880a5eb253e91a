#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robsub::{Constraint, Graph, RobustInstance, RobustObjective, SetFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_c sqrt(w(X ∩ C_c))` over a random partition into `k` clusters.
pub fn random_com(rng: &mut ChaCha8Rng, n: usize, k: usize) -> SetFunction {
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut clusters = vec![Vec::new(); k];
    for j in 0..n {
        clusters[rng.random_range(0..k)].push(j);
    }
    clusters.retain(|c| !c.is_empty());
    SetFunction::concave_over_modular(clusters, weights, 0.5).unwrap()
}

pub fn random_objective(rng: &mut ChaCha8Rng, n: usize, l: usize) -> RobustObjective {
    let k = rng.random_range(1..=3.min(n));
    RobustObjective::new((0..l).map(|_| random_com(rng, n, k)).collect()).unwrap()
}

/// Connected graph on `vertices` with exactly `edges` distinct edges.
pub fn random_connected(rng: &mut ChaCha8Rng, vertices: usize, edges: usize) -> Graph {
    let mut order: Vec<usize> = (0..vertices).collect();
    order.shuffle(rng);
    let mut list: Vec<(usize, usize)> = (1..vertices)
        .map(|i| {
            let j = order[rng.random_range(0..i)];
            let (a, b) = (order[i], j);
            (a.min(b), a.max(b))
        })
        .collect();
    let mut pool: Vec<(usize, usize)> = (0..vertices)
        .flat_map(|u| (u + 1..vertices).map(move |v| (u, v)))
        .filter(|e| !list.contains(e))
        .collect();
    pool.shuffle(rng);
    list.extend(pool.into_iter().take(edges - list.len()));
    list.sort_unstable();
    Graph::new(vertices, list).unwrap()
}

pub fn cardinality(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let obj = random_objective(rng, 10, l);
    RobustInstance::new(obj, Constraint::cardinality_at_least(10, 3).unwrap()).unwrap()
}

pub fn trees(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let obj = random_objective(rng, 10, l);
    RobustInstance::new(obj, Constraint::spanning_tree(Graph::complete(5).unwrap()).unwrap()).unwrap()
}

pub fn matchings(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let obj = random_objective(rng, 16, l);
    RobustInstance::new(
        obj,
        Constraint::perfect_matching(Graph::complete_bipartite(4).unwrap()).unwrap(),
    )
    .unwrap()
}

pub fn paths(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let g = random_connected(rng, 6, 8).with_terminals(0, 5).unwrap();
    let obj = random_objective(rng, 8, l);
    RobustInstance::new(obj, Constraint::st_path(g).unwrap()).unwrap()
}

pub fn cuts(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let g = random_connected(rng, 6, 8).with_terminals(0, 5).unwrap();
    let obj = random_objective(rng, 8, l);
    RobustInstance::new(obj, Constraint::st_cut(g).unwrap()).unwrap()
}

pub fn vertex_covers(rng: &mut ChaCha8Rng, l: usize) -> RobustInstance {
    let g = random_connected(rng, 8, 10);
    let obj = random_objective(rng, 8, l);
    RobustInstance::new(obj, Constraint::vertex_cover(g).unwrap()).unwrap()
}

pub type Generator = fn(&mut ChaCha8Rng, usize) -> RobustInstance;

pub const FAMILIES: [(&str, Generator); 6] = [
    ("cardinality", cardinality),
    ("tree", trees),
    ("matching", matchings),
    ("path", paths),
    ("cut", cuts),
    ("vertex-cover", vertex_covers),
];
