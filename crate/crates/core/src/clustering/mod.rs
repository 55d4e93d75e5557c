//! State-space clustering of stored transitions.
//!
//! A [`Clusterer`] maps a transition's first state to a [`ClusterCode`], either
//! through SimHash or through a k-means model fitted once on a warmup sample.
//! [`ClusterIndex`] holds the resulting membership and counts.

mod index;
mod kmeans;
mod simhash;

use rand::Rng as _;
use rand_distr::StandardNormal;

pub use index::{ClusterCode, ClusterIndex};
pub use kmeans::{KMeansModel, DEFAULT_MAX_ITERATIONS};
pub use simhash::{bits_for_clusters, HashCode, SimHash, MAX_CODE_BITS};

use crate::error::{Error, Result};
use crate::rng;

/// Observations wider than this are projected down before clustering.
pub const MAX_RAW_FEATURE_DIM: usize = 64;

pub const DEFAULT_SIMHASH_CLUSTERS: usize = 128;
pub const DEFAULT_KMEANS_CLUSTERS: usize = 64;
pub const DEFAULT_KMEANS_WARMUP: usize = 2000;

/// Fixed map from observations to clustering features.
#[derive(Debug, Clone)]
pub enum Featurizer {
    Identity { dim: usize },
    /// Seeded Gaussian projection, `out x in`, row-major.
    Projection { input: usize, output: usize, matrix: Vec<f64> },
}

impl Featurizer {
    pub fn for_dim(dim: usize, seed: u64) -> Self {
        if dim <= MAX_RAW_FEATURE_DIM {
            return Featurizer::Identity { dim };
        }
        let mut rng = rng::stream(seed ^ 0x9e37_79b9_7f4a_7c15, rng::streams::CLUSTERING);
        let scale = 1.0 / (MAX_RAW_FEATURE_DIM as f64).sqrt();
        let matrix = (0..dim * MAX_RAW_FEATURE_DIM)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
            .collect();
        Featurizer::Projection {
            input: dim,
            output: MAX_RAW_FEATURE_DIM,
            matrix,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Featurizer::Identity { dim } => *dim,
            Featurizer::Projection { output, .. } => *output,
        }
    }

    pub fn features(&self, state: &[f64]) -> Vec<f64> {
        match self {
            Featurizer::Identity { .. } => state.to_vec(),
            Featurizer::Projection { input, output, matrix } => (0..*output)
                .map(|r| {
                    matrix[r * input..(r + 1) * input]
                        .iter()
                        .zip(state)
                        .map(|(w, x)| w * x)
                        .sum()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClustererKind {
    SimHash,
    KMeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClustererConfig {
    pub kind: ClustererKind,
    /// Cluster budget: k for k-means, k_target for SimHash (code width is
    /// ceil(log2(k_target))).
    pub clusters: usize,
    /// Number of stored states the k-means model is fitted on.
    pub warmup_size: usize,
}

impl ClustererConfig {
    pub fn simhash(k_target: usize) -> Self {
        Self {
            kind: ClustererKind::SimHash,
            clusters: k_target,
            warmup_size: 0,
        }
    }

    pub fn kmeans(k: usize, warmup_size: usize) -> Self {
        Self {
            kind: ClustererKind::KMeans,
            clusters: k,
            warmup_size,
        }
    }
}

impl Default for ClustererConfig {
    fn default() -> Self {
        Self::kmeans(DEFAULT_KMEANS_CLUSTERS, DEFAULT_KMEANS_WARMUP)
    }
}

#[derive(Debug, Clone)]
enum Model {
    SimHash(SimHash),
    KMeans { k: usize, warmup: usize, seed: u64, fitted: Option<KMeansModel> },
}

#[derive(Debug, Clone)]
pub struct Clusterer {
    featurizer: Featurizer,
    model: Model,
}

impl Clusterer {
    pub fn new(config: ClustererConfig, state_dim: usize, seed: u64) -> Result<Self> {
        let featurizer = Featurizer::for_dim(state_dim, seed);
        let model = match config.kind {
            ClustererKind::SimHash => Model::SimHash(SimHash::with_cluster_budget(
                config.clusters,
                featurizer.output_dim(),
                seed,
            )?),
            ClustererKind::KMeans => {
                if config.clusters == 0 {
                    return Err(Error::Config("k-means needs k >= 1".into()));
                }
                if config.warmup_size < config.clusters {
                    return Err(Error::Config(format!(
                        "k-means warmup size {} is smaller than k={}",
                        config.warmup_size, config.clusters
                    )));
                }
                Model::KMeans {
                    k: config.clusters,
                    warmup: config.warmup_size,
                    seed,
                    fitted: None,
                }
            }
        };
        Ok(Self { featurizer, model })
    }

    pub fn is_ready(&self) -> bool {
        match &self.model {
            Model::SimHash(_) => true,
            Model::KMeans { fitted, .. } => fitted.is_some(),
        }
    }

    /// States needed before [`Clusterer::fit`] can be called; zero when no fit
    /// is required.
    pub fn warmup_size(&self) -> usize {
        match &self.model {
            Model::SimHash(_) => 0,
            Model::KMeans { warmup, .. } => *warmup,
        }
    }

    /// Fits the k-means model on the given states. A no-op for SimHash.
    pub fn fit<'a>(&mut self, states: impl IntoIterator<Item = &'a [f64]>) -> Result<()> {
        let featurizer = &self.featurizer;
        if let Model::KMeans { k, seed, fitted, .. } = &mut self.model {
            let samples: Vec<Vec<f64>> = states.into_iter().map(|s| featurizer.features(s)).collect();
            *fitted = Some(KMeansModel::fit(&samples, *k, *seed)?);
        }
        Ok(())
    }

    pub fn kmeans_model(&self) -> Option<&KMeansModel> {
        match &self.model {
            Model::KMeans { fitted, .. } => fitted.as_ref(),
            Model::SimHash(_) => None,
        }
    }

    pub fn code(&self, state: &[f64]) -> Result<ClusterCode> {
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite state component".into()));
        }
        let features = self.featurizer.features(state);
        match &self.model {
            Model::SimHash(h) => Ok(h.code(&features)?.0),
            Model::KMeans { fitted: Some(m), .. } => Ok(m.assign(&features)? as ClusterCode),
            Model::KMeans { fitted: None, .. } => Err(Error::NotReady("k-means model not fitted yet".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_states_are_projected() {
        let f = Featurizer::for_dim(100, 1);
        assert_eq!(f.output_dim(), MAX_RAW_FEATURE_DIM);
        assert_eq!(f.features(&vec![1.0; 100]).len(), MAX_RAW_FEATURE_DIM);
        assert!(matches!(Featurizer::for_dim(64, 1), Featurizer::Identity { dim: 64 }));
    }

    #[test]
    fn kmeans_clusterer_needs_fit() {
        let mut c = Clusterer::new(ClustererConfig::kmeans(2, 4), 1, 0).unwrap();
        assert!(!c.is_ready());
        assert!(matches!(c.code(&[0.0]), Err(Error::NotReady(_))));
        let states = [[0.0], [0.1], [10.0], [10.1]];
        c.fit(states.iter().map(|s| s.as_slice())).unwrap();
        assert!(c.is_ready());
        assert_eq!(c.code(&[0.05]).unwrap(), c.code(&[0.0]).unwrap());
        assert_ne!(c.code(&[0.05]).unwrap(), c.code(&[10.0]).unwrap());
    }

    #[test]
    fn simhash_clusterer_is_ready_immediately() {
        let c = Clusterer::new(ClustererConfig::simhash(128), 3, 0).unwrap();
        assert!(c.is_ready());
        assert!(c.code(&[1.0, -2.0, 0.5]).unwrap() < 128);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Clusterer::new(ClustererConfig::kmeans(0, 10), 2, 0).is_err());
        assert!(Clusterer::new(ClustererConfig::kmeans(64, 10), 2, 0).is_err());
        assert!(Clusterer::new(ClustererConfig::simhash(1), 2, 0).is_err());
    }
}
