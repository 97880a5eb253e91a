//! Minimum-cost set cover: exact branch-and-bound for small systems, greedy
//! with an `H(d)` guarantee above that.

/// Largest number of usable covering sets solved exactly.
pub const EXACT_COVER_LIMIT: usize = 20;

/// Ground element `j` covers the universe items `sets[j]`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CoverSystem {
    universe: usize,
    sets: Vec<Vec<usize>>,
    covered_by: Vec<Vec<usize>>,
}

impl CoverSystem {
    pub fn new(universe: usize, sets: Vec<Vec<usize>>) -> Self {
        let mut covered_by = vec![Vec::new(); universe];
        for (j, s) in sets.iter().enumerate() {
            for &u in s {
                covered_by[u].push(j);
            }
        }
        Self {
            universe,
            sets,
            covered_by,
        }
    }

    pub fn covered_by(&self) -> &[Vec<usize>] {
        &self.covered_by
    }

    pub fn covers(&self, chosen: &[bool]) -> bool {
        self.covered_by.iter().all(|by| by.iter().any(|&j| chosen[j]))
    }

    /// Cheapest cover using only allowed sets. Returns the chosen sets and the
    /// approximation factor of the method used (1 when exact).
    pub fn solve(&self, costs: &[f64], allowed: &[bool]) -> Option<(Vec<usize>, f64)> {
        if !self.covers(allowed) {
            return None;
        }
        let usable = allowed.iter().filter(|&&a| a).count();
        if usable <= EXACT_COVER_LIMIT {
            Some((self.exact(costs, allowed), 1.0))
        } else {
            let max_size = (0..self.sets.len())
                .filter(|&j| allowed[j])
                .map(|j| self.sets[j].len())
                .max()
                .unwrap_or(1);
            let harmonic: f64 = (1..=max_size.max(1)).map(|i| 1.0 / i as f64).sum();
            Some((self.greedy(costs, allowed), harmonic))
        }
    }

    fn exact(&self, costs: &[f64], allowed: &[bool]) -> Vec<usize> {
        struct Search<'a> {
            sys: &'a CoverSystem,
            costs: &'a [f64],
            options: Vec<Vec<usize>>,
            chosen: Vec<bool>,
            cover_count: Vec<usize>,
            best_cost: f64,
            best: Vec<bool>,
        }

        impl Search<'_> {
            fn run(&mut self, cost: f64) {
                if cost >= self.best_cost {
                    return;
                }
                // branch on the uncovered item with the fewest options
                let pick = (0..self.sys.universe)
                    .filter(|&u| self.cover_count[u] == 0)
                    .min_by_key(|&u| (self.options[u].len(), u));
                let Some(item) = pick else {
                    self.best_cost = cost;
                    self.best = self.chosen.clone();
                    return;
                };
                for k in 0..self.options[item].len() {
                    let j = self.options[item][k];
                    if self.chosen[j] {
                        continue;
                    }
                    self.chosen[j] = true;
                    for &u in &self.sys.sets[j] {
                        self.cover_count[u] += 1;
                    }
                    self.run(cost + self.costs[j]);
                    for &u in &self.sys.sets[j] {
                        self.cover_count[u] -= 1;
                    }
                    self.chosen[j] = false;
                }
            }
        }

        let options = self
            .covered_by
            .iter()
            .map(|by| {
                let mut o: Vec<usize> = by.iter().copied().filter(|&j| allowed[j]).collect();
                o.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
                o
            })
            .collect();
        let mut search = Search {
            sys: self,
            costs,
            options,
            chosen: vec![false; self.sets.len()],
            cover_count: vec![0; self.universe],
            best_cost: f64::INFINITY,
            best: allowed.to_vec(),
        };
        search.run(0.0);
        (0..self.sets.len()).filter(|&j| search.best[j]).collect()
    }

    fn greedy(&self, costs: &[f64], allowed: &[bool]) -> Vec<usize> {
        let mut covered = vec![false; self.universe];
        let mut chosen = vec![false; self.sets.len()];
        let mut remaining = self.universe;
        while remaining > 0 {
            let mut best: Option<(f64, usize)> = None;
            for j in (0..self.sets.len()).filter(|&j| allowed[j] && !chosen[j]) {
                let fresh = self.sets[j].iter().filter(|&&u| !covered[u]).count();
                if fresh == 0 {
                    continue;
                }
                let ratio = costs[j] / fresh as f64;
                if best.is_none_or(|(r, _)| ratio < r) {
                    best = Some((ratio, j));
                }
            }
            let (_, j) = best.expect("allowed sets cover the universe");
            chosen[j] = true;
            for &u in &self.sets[j] {
                if !covered[u] {
                    covered[u] = true;
                    remaining -= 1;
                }
            }
        }
        // drop sets made redundant by later picks, most expensive first
        let mut picked: Vec<usize> = (0..self.sets.len()).filter(|&j| chosen[j]).collect();
        picked.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
        for j in picked {
            chosen[j] = false;
            if !self.covers(&chosen) {
                chosen[j] = true;
            }
        }
        (0..self.sets.len()).filter(|&j| chosen[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(sys: &CoverSystem, costs: &[f64]) -> f64 {
        let m = sys.sets.len();
        (0u64..1 << m)
            .filter_map(|b| {
                let chosen: Vec<bool> = (0..m).map(|j| b >> j & 1 == 1).collect();
                sys.covers(&chosen)
                    .then(|| (0..m).filter(|&j| chosen[j]).map(|j| costs[j]).sum())
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn exact_matches_enumeration() {
        let sys = CoverSystem::new(
            5,
            vec![
                vec![0, 1],
                vec![1, 2, 3],
                vec![3, 4],
                vec![0, 4],
                vec![2],
                vec![0, 1, 2, 3, 4],
            ],
        );
        for costs in [
            vec![1.0, 1.0, 1.0, 1.0, 1.0, 10.0],
            vec![1.0, 2.0, 1.0, 3.0, 0.5, 2.5],
            vec![0.0, 0.0, 5.0, 5.0, 5.0, 4.0],
        ] {
            let (set, beta) = sys.solve(&costs, &[true; 6]).unwrap();
            assert_eq!(beta, 1.0);
            let cost: f64 = set.iter().map(|&j| costs[j]).sum();
            assert!((cost - brute(&sys, &costs)).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_is_a_cover_within_harmonic_factor() {
        // 24 sets over a universe of 12: forces the greedy path
        let sets: Vec<Vec<usize>> = (0..24).map(|j| vec![j % 12, (j * 5 + 1) % 12]).collect();
        let sys = CoverSystem::new(12, sets);
        let costs: Vec<f64> = (0..24).map(|j| 1.0 + (j % 7) as f64).collect();
        let (set, beta) = sys.solve(&costs, &[true; 24]).unwrap();
        assert!((beta - 1.5).abs() < 1e-12);
        let mut chosen = vec![false; 24];
        for j in set {
            chosen[j] = true;
        }
        assert!(sys.covers(&chosen));
    }

    #[test]
    fn uncoverable_is_none() {
        let sys = CoverSystem::new(2, vec![vec![0], vec![1]]);
        assert!(sys.solve(&[1.0, 1.0], &[true, false]).is_none());
    }
}
