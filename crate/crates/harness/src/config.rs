//! TOML experiment configuration.

use crate::error::{HarnessError, Result};
use robsub::{Algorithm, Strategy};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub synthetic: Option<SyntheticConfig>,
    pub matching: Option<MatchExperimentConfig>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::parse(&text)
    }
}

/// Either a count `N` (seeds `0..N`) or an explicit list.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

/// Feasible family of a synthetic instance. Graph-based kinds draw a fresh
/// random graph per seed, except the complete ones.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintSpec {
    /// `|X| >= k` over `n` elements.
    Cardinality {
        k: usize,
    },
    /// Perfect matchings of the complete bipartite graph with `side` vertices per side.
    Matching {
        side: usize,
    },
    /// Spanning trees of the complete graph.
    Tree {
        vertices: usize,
    },
    /// s-t paths in a random connected graph, `s = 0`, `t = vertices - 1`.
    Path {
        vertices: usize,
        edges: usize,
    },
    /// s-t cuts in a random connected graph, `s = 0`, `t = vertices - 1`.
    Cut {
        vertices: usize,
        edges: usize,
    },
    VertexCover {
        vertices: usize,
        edges: usize,
    },
    EdgeCover {
        vertices: usize,
        edges: usize,
    },
}

impl ConstraintSpec {
    /// Ground-set size implied by the constraint, if it does not depend on `n`.
    pub fn ground_size(&self) -> Option<usize> {
        match *self {
            ConstraintSpec::Cardinality { .. } => None,
            ConstraintSpec::Matching { side } => Some(side * side),
            ConstraintSpec::Tree { vertices } => Some(vertices * vertices.saturating_sub(1) / 2),
            ConstraintSpec::Path { edges, .. }
            | ConstraintSpec::Cut { edges, .. }
            | ConstraintSpec::EdgeCover { edges, .. } => Some(edges),
            ConstraintSpec::VertexCover { vertices, .. } => Some(vertices),
        }
    }

    pub fn is_matching(&self) -> bool {
        matches!(self, ConstraintSpec::Matching { .. })
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// `f_i(X) = Σ_j w(X ∩ C_ij)^p` over a random clustering per function,
    /// with one shared weight vector.
    #[default]
    Cooperative,
    /// Independent random modular weights per function.
    Modular,
}

/// A solver run by the harness: one of the robust submodular algorithms, or
/// a single robust-modular strategy (modular objectives only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Solver(Algorithm),
    RobustModular(Strategy),
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rm-avg" => Some(Method::RobustModular(Strategy::Average)),
            "rm-max" => Some(Method::RobustModular(Strategy::Max)),
            "rm-quadratic" => Some(Method::RobustModular(Strategy::Quadratic)),
            other => Algorithm::parse(other).map(Method::Solver),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Solver(a) => a.name(),
            Method::RobustModular(Strategy::Average) => "rm-avg",
            Method::RobustModular(Strategy::Max) => "rm-max",
            Method::RobustModular(Strategy::Quadratic) => "rm-quadratic",
        }
    }
}

pub fn parse_methods(names: &[String]) -> Result<Vec<Method>> {
    if names.is_empty() {
        return Err(HarnessError::Config("algorithm list is empty".into()));
    }
    names
        .iter()
        .map(|s| Method::parse(s.trim()).ok_or_else(|| HarnessError::Config(format!("unknown algorithm {s:?}"))))
        .collect()
}

fn default_algorithms() -> Vec<String> {
    Algorithm::ALL.iter().map(|a| a.name().to_string()).collect()
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Ground-set size; required for cardinality, checked against the graph
    /// otherwise.
    pub n: Option<usize>,
    #[serde(default = "SyntheticConfig::default_l")]
    pub l: usize,
    /// Clusters per function.
    #[serde(default = "SyntheticConfig::default_clusters")]
    pub clusters: usize,
    #[serde(default = "SyntheticConfig::default_exponent")]
    pub exponent: f64,
    #[serde(default)]
    pub objective: ObjectiveKind,
    pub constraint: ConstraintSpec,
    #[serde(default = "SyntheticConfig::default_seeds")]
    pub seeds: Seeds,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default)]
    pub oracle: bool,
}

impl SyntheticConfig {
    fn default_l() -> usize {
        10
    }
    fn default_clusters() -> usize {
        5
    }
    fn default_exponent() -> f64 {
        0.5
    }
    fn default_seeds() -> Seeds {
        Seeds::Count(20)
    }

    /// `n = 50` with `|X| >= 10`.
    pub fn cardinality_default() -> Self {
        Self::with_constraint(Some(50), ConstraintSpec::Cardinality { k: 10 })
    }

    /// Perfect matchings on `K_{7,7}` (`n = 49`).
    pub fn matching_default() -> Self {
        Self::with_constraint(None, ConstraintSpec::Matching { side: 7 })
    }

    fn with_constraint(n: Option<usize>, constraint: ConstraintSpec) -> Self {
        Self {
            n,
            l: Self::default_l(),
            clusters: Self::default_clusters(),
            exponent: Self::default_exponent(),
            objective: ObjectiveKind::Cooperative,
            constraint,
            seeds: Self::default_seeds(),
            algorithms: default_algorithms(),
            oracle: false,
        }
    }

    /// Ground-set size after validation.
    pub fn ground_size(&self) -> Result<usize> {
        match (self.n, self.constraint.ground_size()) {
            (Some(n), None) => Ok(n),
            (None, Some(m)) => Ok(m),
            (Some(n), Some(m)) if n == m => Ok(n),
            (Some(n), Some(m)) => Err(HarnessError::Config(format!(
                "n = {n} but the constraint has {m} elements"
            ))),
            (None, None) => Err(HarnessError::Config("cardinality constraints need `n`".into())),
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        parse_methods(&self.algorithms)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ground_size()?;
        let err = |m: String| Err(HarnessError::Config(m));
        if n == 0 {
            return err("empty ground set".into());
        }
        if self.l == 0 {
            return err("l must be at least 1".into());
        }
        if self.clusters == 0 {
            return err("clusters must be at least 1".into());
        }
        if !(self.exponent > 0.0 && self.exponent <= 1.0) {
            return err(format!("exponent {} outside (0, 1]", self.exponent));
        }
        if self.seeds.to_vec().is_empty() {
            return err("no seeds".into());
        }
        match self.constraint {
            ConstraintSpec::Cardinality { k } if k > n => return err(format!("k = {k} exceeds n = {n}")),
            ConstraintSpec::Matching { side: 0 } => return err("matching side must be positive".into()),
            ConstraintSpec::Tree { vertices } if vertices < 2 => return err("trees need at least 2 vertices".into()),
            ConstraintSpec::Path { vertices, edges }
            | ConstraintSpec::Cut { vertices, edges }
            | ConstraintSpec::VertexCover { vertices, edges }
            | ConstraintSpec::EdgeCover { vertices, edges }
                if (vertices < 2 || edges + 1 < vertices || edges > vertices * (vertices - 1) / 2) =>
            {
                return err(format!(
                    "no connected simple graph with {vertices} vertices and {edges} edges"
                ));
            }
            _ => {}
        }
        for m in self.methods()? {
            if let Method::RobustModular(s) = m {
                if self.objective != ObjectiveKind::Modular {
                    return err(format!("{} needs `objective = \"modular\"`", m.name()));
                }
                if s == Strategy::Quadratic && !self.constraint.is_matching() {
                    return err("rm-quadratic needs a matching constraint".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureCost {
    /// Euclidean distance between the two keypoints.
    #[default]
    Euclidean,
    SquaredEuclidean,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MatchExperimentConfig {
    /// Number of k-means clusterings `l`.
    #[serde(default = "MatchExperimentConfig::default_clusterings")]
    pub clusterings: usize,
    /// Clusters per k-means run.
    #[serde(default = "MatchExperimentConfig::default_clusters")]
    pub clusters: usize,
    /// Clustering `i` uses seed `kmeans_seed + i`.
    #[serde(default)]
    pub kmeans_seed: u64,
    #[serde(default)]
    pub cost: FeatureCost,
    /// Solver used for the cooperative and robust models.
    #[serde(default = "MatchExperimentConfig::default_algorithm")]
    pub algorithm: String,
    /// Frame sequences generated for the synthetic stand-in.
    #[serde(default = "MatchExperimentConfig::default_seeds")]
    pub seeds: Seeds,
    #[serde(default = "MatchExperimentConfig::default_points")]
    pub points: usize,
    /// Rigid groups of keypoints that drift together.
    #[serde(default = "MatchExperimentConfig::default_blobs")]
    pub blobs: usize,
    #[serde(default = "MatchExperimentConfig::default_frames")]
    pub frames: usize,
    /// Standard deviation of each group's drift per frame.
    #[serde(default = "MatchExperimentConfig::default_noise")]
    pub noise: f64,
    /// Standard deviation of independent per-point jitter in every frame.
    #[serde(default = "MatchExperimentConfig::default_jitter")]
    pub jitter: f64,
    #[serde(default = "MatchExperimentConfig::default_separations")]
    pub separations: Vec<usize>,
    /// Keypoint files of a real sequence, used instead of the synthetic
    /// frames. Point `i` of every file is the same physical landmark.
    #[serde(default)]
    pub frame_files: Vec<PathBuf>,
    /// Whether point order encodes the true correspondence.
    #[serde(default = "MatchExperimentConfig::default_ground_truth")]
    pub ground_truth: bool,
}

impl Default for MatchExperimentConfig {
    fn default() -> Self {
        Self {
            clusterings: Self::default_clusterings(),
            clusters: Self::default_clusters(),
            kmeans_seed: 0,
            cost: FeatureCost::Euclidean,
            algorithm: Self::default_algorithm(),
            seeds: Self::default_seeds(),
            points: Self::default_points(),
            blobs: Self::default_blobs(),
            frames: Self::default_frames(),
            noise: Self::default_noise(),
            jitter: Self::default_jitter(),
            separations: Self::default_separations(),
            frame_files: Vec::new(),
            ground_truth: Self::default_ground_truth(),
        }
    }
}

impl MatchExperimentConfig {
    fn default_clusterings() -> usize {
        10
    }
    fn default_clusters() -> usize {
        3
    }
    fn default_algorithm() -> String {
        "mmin".into()
    }
    fn default_seeds() -> Seeds {
        Seeds::Count(3)
    }
    fn default_points() -> usize {
        8
    }
    fn default_blobs() -> usize {
        3
    }
    fn default_frames() -> usize {
        5
    }
    fn default_noise() -> f64 {
        4.0
    }
    fn default_jitter() -> f64 {
        1.0
    }
    fn default_separations() -> Vec<usize> {
        vec![1, 2, 3, 4]
    }
    fn default_ground_truth() -> bool {
        true
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::parse(&self.algorithm)
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm {:?}", self.algorithm)))
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(HarnessError::Config(m));
        self.algorithm()?;
        if self.clusterings == 0 {
            return err("clusterings must be at least 1".into());
        }
        if self.clusters == 0 {
            return err("clusters must be at least 1".into());
        }
        if self.separations.is_empty() || self.separations.contains(&0) {
            return err("separations must be a nonempty list of positive integers".into());
        }
        if self.frame_files.is_empty() {
            if self.points == 0 || self.blobs == 0 || self.blobs > self.points {
                return err("synthetic frames need 1 <= blobs <= points".into());
            }
            if self.frames < 2 {
                return err("synthetic sequences need at least 2 frames".into());
            }
            if !(self.noise >= 0.0 && self.jitter >= 0.0) {
                return err("noise and jitter must be nonnegative".into());
            }
            if self.seeds.to_vec().is_empty() {
                return err("no seeds".into());
            }
            if self.clusters > 2 * self.points {
                return err("more clusters than keypoints in a frame pair".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_file() {
        let cfg = ConfigFile::parse(
            r#"
            [synthetic]
            n = 10
            l = 2
            seeds = [3, 5]
            algorithms = ["mmin", "ea"]
            constraint = { kind = "cardinality", k = 3 }

            [matching]
            clusterings = 4
            cost = "squared-euclidean"
            "#,
        )
        .unwrap();
        let s = cfg.synthetic.unwrap();
        assert_eq!(s.ground_size().unwrap(), 10);
        assert_eq!(s.seeds.to_vec(), vec![3, 5]);
        assert_eq!(s.exponent, 0.5);
        s.validate().unwrap();
        let m = cfg.matching.unwrap();
        assert_eq!(m.clusterings, 4);
        assert_eq!(m.cost, FeatureCost::SquaredEuclidean);
        m.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            ConfigFile::parse("[synthetic]\nbogus = 1\n"),
            Err(HarnessError::Config(_))
        ));
        let mut s = SyntheticConfig::cardinality_default();
        s.algorithms = vec!["nope".into()];
        assert!(s.validate().is_err());
        let mut s = SyntheticConfig::matching_default();
        s.n = Some(50);
        assert!(s.validate().is_err());
        let mut s = SyntheticConfig::cardinality_default();
        s.algorithms = vec!["rm-avg".into()];
        assert!(s.validate().is_err());
        s.objective = ObjectiveKind::Modular;
        s.validate().unwrap();
        s.algorithms = vec!["rm-quadratic".into()];
        assert!(s.validate().is_err());
    }

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = SyntheticConfig::cardinality_default();
        assert_eq!((c.ground_size().unwrap(), c.l, c.seeds.to_vec().len()), (50, 10, 20));
        assert_eq!(SyntheticConfig::matching_default().ground_size().unwrap(), 49);
        MatchExperimentConfig::default().validate().unwrap();
    }
}
