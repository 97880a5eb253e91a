//! Cooperative keypoint matching: a modular baseline, single-clustering
//! cooperative models, and the robust model over several clusterings.

use crate::config::{FeatureCost, MatchExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::keypoints::{ingest_keypoints, KeypointSet, Point};
use crate::kmeans::kmeans;
use crate::report::{fmt_f64, fmt_opt};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use robsub::solvers::{run, SolveOptions};
use robsub::{Algorithm, Constraint, Graph, RobustInstance, RobustObjective, SetFunction};
use std::collections::BTreeMap;
use std::time::Instant;

/// Spread of keypoints around their group center in synthetic frames.
const GROUP_SPREAD: f64 = 8.0;
/// Side of the square synthetic group centers are drawn from.
const FIELD: f64 = 100.0;

/// Ground-set index of the edge between left point `a` and right point `b`
/// in `K_{m,m}` as built by [`Graph::complete_bipartite`].
pub fn edge_index(a: usize, b: usize, m: usize) -> usize {
    a * m + b
}

pub fn feature_costs(left: &[Point], right: &[Point], cost: FeatureCost) -> Vec<f64> {
    let m = right.len();
    let mut w = vec![0.0; left.len() * m];
    for (a, p) in left.iter().enumerate() {
        for (b, q) in right.iter().enumerate() {
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            w[edge_index(a, b, m)] = match cost {
                FeatureCost::Euclidean => d2.sqrt(),
                FeatureCost::SquaredEuclidean => d2,
            };
        }
    }
    w
}

/// Groups edges by the (left cluster, right cluster) pair of their
/// endpoints. `labels` covers the left points followed by the right points.
pub fn edge_clusters(labels: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for a in 0..m {
        for b in 0..m {
            groups
                .entry((labels[a], labels[m + b]))
                .or_default()
                .push(edge_index(a, b, m));
        }
    }
    groups.into_values().collect()
}

/// Matching instance on `K_{m,m}`: `f_i(S) = Σ_j sqrt(w(S ∩ E^i_j))` where
/// `E^i_j` are the edge groups induced by k-means clustering `i` of the
/// union of both keypoint sets.
pub fn build_cooperative_objectives(
    left: &KeypointSet,
    right: &KeypointSet,
    cfg: &MatchExperimentConfig,
) -> Result<RobustInstance> {
    let m = left.len();
    if right.len() != m {
        return Err(HarnessError::Config(format!(
            "frames {} and {} have {} and {} keypoints",
            left.frame,
            right.frame,
            m,
            right.len()
        )));
    }
    let union: Vec<Point> = left.points.iter().chain(&right.points).copied().collect();
    let w = feature_costs(&left.points, &right.points, cfg.cost);
    let functions = (0..cfg.clusterings)
        .map(|i| {
            let labels = kmeans(&union, cfg.clusters, cfg.kmeans_seed + i as u64).map_err(HarnessError::Config)?;
            Ok(SetFunction::concave_over_modular(
                edge_clusters(&labels, m),
                w.clone(),
                0.5,
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let constraint = Constraint::perfect_matching(Graph::complete_bipartite(m)?)?;
    Ok(RobustInstance::new(RobustObjective::new(functions)?, constraint)?)
}

/// Frames of one synthetic sequence: keypoints in rigid groups whose
/// centers drift by `N(0, noise²)` per frame, plus independent
/// `N(0, jitter²)` jitter on every point of every frame.
pub fn synthetic_sequence(cfg: &MatchExperimentConfig, seed: u64) -> Result<Vec<KeypointSet>> {
    let gauss = |s: f64| Normal::new(0.0, s).map_err(|e| HarnessError::Config(e.to_string()));
    let (spread, noise, jitter) = (gauss(GROUP_SPREAD)?, gauss(cfg.noise)?, gauss(cfg.jitter)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Point> = (0..cfg.blobs)
        .map(|_| [rng.random_range(0.0..FIELD), rng.random_range(0.0..FIELD)])
        .collect();
    let base: Vec<Point> = (0..cfg.points)
        .map(|i| {
            let c = centers[i % cfg.blobs];
            [c[0] + spread.sample(&mut rng), c[1] + spread.sample(&mut rng)]
        })
        .collect();
    let mut drift = vec![[0.0, 0.0]; cfg.blobs];
    let mut frames = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        if t > 0 {
            for d in &mut drift {
                d[0] += noise.sample(&mut rng);
                d[1] += noise.sample(&mut rng);
            }
        }
        let points = base
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = drift[i % cfg.blobs];
                [
                    p[0] + d[0] + jitter.sample(&mut rng),
                    p[1] + d[1] + jitter.sample(&mut rng),
                ]
            })
            .collect();
        frames.push(KeypointSet::new(format!("s{seed}f{t}"), points).map_err(HarnessError::Config)?);
    }
    Ok(frames)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub sequence: String,
    pub left_frame: usize,
    pub right_frame: usize,
    pub left: KeypointSet,
    /// Right frame with its points shuffled.
    pub right: KeypointSet,
    /// `truth[a]` is the index in `right` of left point `a`'s counterpart.
    pub truth: Option<Vec<usize>>,
}

impl FramePair {
    pub fn separation(&self) -> usize {
        self.right_frame - self.left_frame
    }
}

/// Every `(t, t + s)` pair for the configured separations, with the right
/// frame shuffled by a permutation drawn from `rng`.
pub fn frame_pairs(
    sequence: &str,
    frames: &[KeypointSet],
    separations: &[usize],
    ground_truth: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<FramePair> {
    let mut pairs = Vec::new();
    for &s in separations {
        for t in 0..frames.len().saturating_sub(s) {
            let (left, right) = (&frames[t], &frames[t + s]);
            let mut order: Vec<usize> = (0..right.len()).collect();
            order.shuffle(rng);
            // right point k of the shuffled frame is original point order[k]
            let mut truth = vec![0; order.len()];
            for (k, &orig) in order.iter().enumerate() {
                truth[orig] = k;
            }
            let shuffled = KeypointSet {
                frame: right.frame.clone(),
                points: order.iter().map(|&i| right.points[i]).collect(),
            };
            pairs.push(FramePair {
                sequence: sequence.to_string(),
                left_frame: t,
                right_frame: t + s,
                left: left.clone(),
                right: shuffled,
                truth: ground_truth.then_some(truth),
            });
        }
    }
    pairs
}

/// Fraction of left points matched to their true counterpart.
pub fn accuracy(set: &[usize], truth: &[usize]) -> f64 {
    let m = truth.len();
    let correct = set.iter().filter(|&&e| truth[e / m] == e % m).count();
    correct as f64 / m as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMethod {
    /// Minimum-cost perfect matching on the feature costs.
    Modular,
    /// Cooperative model with one clustering, averaged over the clusterings.
    Single,
    Robust,
}

impl MatchMethod {
    pub const ALL: [MatchMethod; 3] = [MatchMethod::Modular, MatchMethod::Single, MatchMethod::Robust];

    pub fn name(self) -> &'static str {
        match self {
            MatchMethod::Modular => "modular",
            MatchMethod::Single => "single",
            MatchMethod::Robust => "robust",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: MatchMethod,
    pub accuracy: Option<f64>,
    /// Robust objective `max_i f_i` of the returned matching (mean over
    /// clusterings for the single model).
    pub objective: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub sequence: String,
    pub left_frame: usize,
    pub right_frame: usize,
    pub results: Vec<MethodResult>,
}

impl PairOutcome {
    pub fn separation(&self) -> usize {
        self.right_frame - self.left_frame
    }

    pub fn result(&self, method: MatchMethod) -> &MethodResult {
        self.results
            .iter()
            .find(|r| r.method == method)
            .expect("every method is run")
    }
}

fn checked(inst: &RobustInstance, set: Vec<usize>) -> Result<Vec<usize>> {
    if inst.constraint().is_feasible(&set) {
        Ok(set)
    } else {
        Err(HarnessError::Solver(robsub::Error::InvalidArgument(
            "solver returned a non-matching".into(),
        )))
    }
}

pub fn solve_pair(pair: &FramePair, cfg: &MatchExperimentConfig, algorithm: Algorithm) -> Result<PairOutcome> {
    let inst = build_cooperative_objectives(&pair.left, &pair.right, cfg)?;
    let opts = SolveOptions::default();
    let acc = |set: &[usize]| pair.truth.as_ref().map(|t| accuracy(set, t));
    let mut results = Vec::with_capacity(3);

    let started = Instant::now();
    let w = feature_costs(&pair.left.points, &pair.right.points, cfg.cost);
    let set = checked(&inst, inst.constraint().linear_minimize(&w)?.set)?;
    results.push(MethodResult {
        method: MatchMethod::Modular,
        accuracy: acc(&set),
        objective: inst.value(&set),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    });

    let started = Instant::now();
    let (mut acc_sum, mut obj_sum) = (0.0, 0.0);
    for f in inst.objective().functions() {
        let single = RobustInstance::new(RobustObjective::new(vec![f.clone()])?, inst.constraint().clone())?;
        let set = checked(&inst, run(&single, algorithm, &opts)?.set)?;
        acc_sum += acc(&set).unwrap_or(0.0);
        obj_sum += inst.value(&set);
    }
    let l = inst.l() as f64;
    results.push(MethodResult {
        method: MatchMethod::Single,
        accuracy: pair.truth.as_ref().map(|_| acc_sum / l),
        objective: obj_sum / l,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    });

    let started = Instant::now();
    let set = checked(&inst, run(&inst, algorithm, &opts)?.set)?;
    results.push(MethodResult {
        method: MatchMethod::Robust,
        accuracy: acc(&set),
        objective: inst.value(&set),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    });

    Ok(PairOutcome {
        sequence: pair.sequence.clone(),
        left_frame: pair.left_frame,
        right_frame: pair.right_frame,
        results,
    })
}

/// Seed of the stream that shuffles right frames of ingested sequences.
const FILE_SHUFFLE_SEED: u64 = 0;

/// All frame pairs of the experiment: from `frame_files` when given,
/// otherwise from one synthetic sequence per seed.
pub fn experiment_pairs(cfg: &MatchExperimentConfig) -> Result<Vec<FramePair>> {
    cfg.validate()?;
    if !cfg.frame_files.is_empty() {
        let frames = cfg
            .frame_files
            .iter()
            .map(|p| ingest_keypoints(p))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(FILE_SHUFFLE_SEED);
        return Ok(frame_pairs(
            "files",
            &frames,
            &cfg.separations,
            cfg.ground_truth,
            &mut rng,
        ));
    }
    let mut pairs = Vec::new();
    for seed in cfg.seeds.to_vec() {
        let frames = synthetic_sequence(cfg, seed)?;
        // the shuffle stream is separate from the geometry stream so that
        // changing separations leaves the frames untouched
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5DEE_CE66_D1CE_5EED);
        pairs.extend(frame_pairs(
            &format!("seed{seed}"),
            &frames,
            &cfg.separations,
            true,
            &mut rng,
        ));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingReport {
    pub pairs: Vec<PairOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// `None` aggregates over every separation.
    pub separation: Option<usize>,
    pub method: MatchMethod,
    pub pairs: usize,
    pub mean_accuracy: Option<f64>,
    pub mean_objective: f64,
    pub mean_runtime_ms: f64,
}

/// Runs every frame pair (in parallel), keeping pair order.
pub fn run_matching_experiment(cfg: &MatchExperimentConfig) -> Result<MatchingReport> {
    let algorithm = cfg.algorithm()?;
    let pairs = experiment_pairs(cfg)?
        .par_iter()
        .map(|p| solve_pair(p, cfg, algorithm))
        .collect::<Result<Vec<_>>>()?;
    Ok(MatchingReport { pairs })
}

impl MatchingReport {
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut separations: Vec<usize> = self.pairs.iter().map(PairOutcome::separation).collect();
        separations.sort_unstable();
        separations.dedup();
        let mut out = Vec::new();
        for sep in separations.into_iter().map(Some).chain([None]) {
            let chosen: Vec<&PairOutcome> = self
                .pairs
                .iter()
                .filter(|p| sep.is_none_or(|s| p.separation() == s))
                .collect();
            if chosen.is_empty() {
                continue;
            }
            for method in MatchMethod::ALL {
                let rs: Vec<&MethodResult> = chosen.iter().map(|p| p.result(method)).collect();
                let count = rs.len() as f64;
                let accs: Vec<f64> = rs.iter().filter_map(|r| r.accuracy).collect();
                out.push(Aggregate {
                    separation: sep,
                    method,
                    pairs: rs.len(),
                    mean_accuracy: (!accs.is_empty()).then(|| accs.iter().sum::<f64>() / accs.len() as f64),
                    mean_objective: rs.iter().map(|r| r.objective).sum::<f64>() / count,
                    mean_runtime_ms: rs.iter().map(|r| r.runtime_ms).sum::<f64>() / count,
                });
            }
        }
        out
    }

    pub fn mean_accuracy(&self, method: MatchMethod) -> Option<f64> {
        self.aggregates()
            .into_iter()
            .find(|a| a.separation.is_none() && a.method == method)
            .and_then(|a| a.mean_accuracy)
    }

    /// CSV with one `pair` row per (frame pair, method), one `separation`
    /// row per (separation, method), and one `overall` row per method.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut header = vec![
            "record",
            "sequence",
            "left_frame",
            "right_frame",
            "separation",
            "method",
            "pairs",
            "accuracy",
            "objective",
        ];
        if timing {
            header.push("runtime_ms");
        }
        let mut out = header.join(",") + "\n";
        for p in &self.pairs {
            for r in &p.results {
                let mut row = vec![
                    "pair".to_string(),
                    p.sequence.clone(),
                    p.left_frame.to_string(),
                    p.right_frame.to_string(),
                    p.separation().to_string(),
                    r.method.name().to_string(),
                    "1".to_string(),
                    fmt_opt(r.accuracy),
                    fmt_f64(r.objective),
                ];
                if timing {
                    row.push(fmt_f64(r.runtime_ms));
                }
                out += &(row.join(",") + "\n");
            }
        }
        for a in self.aggregates() {
            let mut row = vec![
                if a.separation.is_some() {
                    "separation"
                } else {
                    "overall"
                }
                .to_string(),
                String::new(),
                String::new(),
                String::new(),
                a.separation.map(|s| s.to_string()).unwrap_or_default(),
                a.method.name().to_string(),
                a.pairs.to_string(),
                fmt_opt(a.mean_accuracy),
                fmt_f64(a.mean_objective),
            ];
            if timing {
                row.push(fmt_f64(a.mean_runtime_ms));
            }
            out += &(row.join(",") + "\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> MatchExperimentConfig {
        MatchExperimentConfig {
            clusterings: 2,
            clusters: 2,
            points: 4,
            blobs: 2,
            frames: 3,
            separations: vec![1, 2],
            seeds: crate::config::Seeds::List(vec![7]),
            ..MatchExperimentConfig::default()
        }
    }

    #[test]
    fn single_clustering_is_sqrt_of_total_cost() {
        let left = KeypointSet::new("a", vec![[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let right = KeypointSet::new("b", vec![[0.0, 1.0], [3.0, 4.0]]).unwrap();
        let cfg = MatchExperimentConfig {
            clusterings: 1,
            clusters: 1,
            ..MatchExperimentConfig::default()
        };
        let inst = build_cooperative_objectives(&left, &right, &cfg).unwrap();
        assert_eq!((inst.n(), inst.l()), (4, 1));
        let w = feature_costs(&left.points, &right.points, FeatureCost::Euclidean);
        let set = vec![edge_index(0, 0, 2), edge_index(1, 1, 2)];
        assert!((inst.value(&set) - (w[0] + w[3]).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn edge_groups_partition_the_edges() {
        let groups = edge_clusters(&[0, 1, 1, 0, 0, 2], 3);
        let mut all: Vec<usize> = groups.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
        assert_eq!(groups.len(), 4);
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let a = KeypointSet::new("a", vec![[0.0, 0.0]]).unwrap();
        let b = KeypointSet::new("b", vec![[0.0, 0.0], [1.0, 1.0]]).unwrap();
        assert!(build_cooperative_objectives(&a, &b, &MatchExperimentConfig::default()).is_err());
    }

    #[test]
    fn pairs_carry_the_shuffle() {
        let cfg = tiny();
        let frames = synthetic_sequence(&cfg, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs = frame_pairs("s", &frames, &[1, 2], true, &mut rng);
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            let truth = p.truth.as_ref().unwrap();
            for (a, &b) in truth.iter().enumerate() {
                assert_eq!(p.right.points[b], frames[p.right_frame].points[a]);
            }
        }
    }

    #[test]
    fn identical_frames_are_matched_perfectly() {
        let cfg = MatchExperimentConfig {
            noise: 0.0,
            jitter: 0.0,
            ..tiny()
        };
        let report = run_matching_experiment(&cfg).unwrap();
        for p in &report.pairs {
            for r in &p.results {
                assert_eq!(r.accuracy, Some(1.0));
                assert_eq!(r.objective, 0.0);
            }
        }
    }

    #[test]
    fn csv_shape() {
        let report = run_matching_experiment(&tiny()).unwrap();
        let csv = report.to_csv(false);
        // 3 pairs x 3 methods, 2 separations x 3 methods, 3 overall rows
        assert_eq!(csv.lines().count(), 1 + 9 + 6 + 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 9));
    }
}
