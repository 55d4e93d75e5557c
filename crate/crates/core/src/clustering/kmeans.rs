//! Lloyd's k-means with k-means++ seeding.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    dim: usize,
    centroids: Vec<Vec<f64>>,
    iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KMeansModel {
    /// Fits `k` centroids to `samples`. Deterministic given `seed`.
    pub fn fit(samples: &[Vec<f64>], k: usize, seed: u64) -> Result<Self> {
        Self::fit_with_cap(samples, k, seed, DEFAULT_MAX_ITERATIONS)
    }

    pub fn fit_with_cap(samples: &[Vec<f64>], k: usize, seed: u64, max_iterations: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("k-means needs k >= 1".into()));
        }
        if samples.len() < k {
            return Err(Error::Config(format!(
                "k-means needs at least k={k} samples, got {}",
                samples.len()
            )));
        }
        let dim = samples[0].len();
        if dim == 0 || samples.iter().any(|s| s.len() != dim) {
            return Err(Error::InvalidInput("k-means samples must share a positive dimension".into()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite k-means sample".into()));
        }

        let mut rng = rng::stream(seed, rng::streams::CLUSTERING);
        let mut centroids = plus_plus_seeds(samples, k, &mut rng);

        let mut assignment = vec![usize::MAX; samples.len()];
        let mut iterations = 0;
        while iterations < max_iterations {
            iterations += 1;
            let mut changed = false;
            for (a, s) in assignment.iter_mut().zip(samples) {
                let nearest = nearest(&centroids, s);
                if *a != nearest {
                    *a = nearest;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (&a, s) in assignment.iter().zip(samples) {
                counts[a] += 1;
                for (acc, v) in sums[a].iter_mut().zip(s) {
                    *acc += v;
                }
            }
            // an emptied cluster keeps its previous centroid
            for ((c, sum), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
                if n > 0 {
                    *c = sum.into_iter().map(|v| v / n as f64).collect();
                }
            }
        }

        Ok(Self {
            dim,
            centroids,
            iterations,
        })
    }

    pub fn from_centroids(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let dim = centroids.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || centroids.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidInput("centroids must share a positive dimension".into()));
        }
        if centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite centroid".into()));
        }
        Ok(Self {
            dim,
            centroids,
            iterations: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Index of the nearest centroid; ties go to the lowest index.
    pub fn assign(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "expected {}-dimensional input, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(nearest(&self.centroids, x))
    }

    /// Sum of squared distances from each sample to its assigned centroid.
    pub fn distortion(&self, samples: &[Vec<f64>]) -> f64 {
        samples
            .iter()
            .map(|s| sq_dist(&self.centroids[nearest(&self.centroids, s)], s))
            .sum()
    }
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn plus_plus_seeds(samples: &[Vec<f64>], k: usize, rng: &mut rng::Rng) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(samples[rng.random_range(0..samples.len())].clone());
    let mut d2: Vec<f64> = samples.iter().map(|s| sq_dist(s, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = samples.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // fewer distinct points than k; duplicates are never assigned to
            // because ties resolve to the lower index
            rng.random_range(0..samples.len())
        };
        let c = samples[pick].clone();
        for (d, s) in d2.iter_mut().zip(samples) {
            *d = d.min(sq_dist(s, &c));
        }
        centroids.push(c);
    }
    centroids
}
