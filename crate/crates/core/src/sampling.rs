//! Per-transition sampling probabilities and batch draws.
//!
//! Three strategies share one formula. With `n` stored transitions, `k`
//! nonempty clusters and `num_i` transitions in transition `i`'s cluster:
//!
//! * `Uniform`: `p_i = 1 / n`
//! * `EqualCluster`: `p_i = 1 / (k * num_i)`
//! * `DistributionAware`: `p_i = beta / n + (1 - beta) / (k * num_i)`
//!
//! so `DistributionAware` at `beta = 1` is uniform and at `beta = 0` is
//! equal-cluster. `k` counts only nonempty clusters, which is what makes the
//! `p_i` sum to one.
//!
//! Draws use the equivalent two-stage mixture: with probability `beta` a
//! uniform slot, otherwise a uniform nonempty cluster and then a uniform
//! member of it.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::clustering::ClusterIndex;
use crate::error::{Error, Result};
use crate::memory::check_consistency;
use crate::replay::{ReplayBuffer, SlotId};

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Uniform,
    EqualCluster,
    DistributionAware,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::EqualCluster => "equal-cluster",
            Strategy::DistributionAware => "distribution-aware",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "uniform" => Ok(Strategy::Uniform),
            "equal-cluster" | "equal" | "cluster" => Ok(Strategy::EqualCluster),
            "distribution-aware" | "aware" => Ok(Strategy::DistributionAware),
            other => Err(Error::Config(format!("unknown sampling strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    strategy: Strategy,
    beta: f64,
}

impl SamplerConfig {
    pub fn new(strategy: Strategy, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Config(format!("beta must lie in [0, 1], got {beta}")));
        }
        Ok(Self { strategy, beta })
    }

    pub fn uniform() -> Self {
        Self {
            strategy: Strategy::Uniform,
            beta: 1.0,
        }
    }

    pub fn equal_cluster() -> Self {
        Self {
            strategy: Strategy::EqualCluster,
            beta: 0.0,
        }
    }

    pub fn distribution_aware(beta: f64) -> Result<Self> {
        Self::new(Strategy::DistributionAware, beta)
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// Weight on the uniform component: 1 for `Uniform`, 0 for
    /// `EqualCluster`, the configured value otherwise.
    pub fn effective_beta(&self) -> f64 {
        match self.strategy {
            Strategy::Uniform => 1.0,
            Strategy::EqualCluster => 0.0,
            Strategy::DistributionAware => self.beta,
        }
    }

    pub fn needs_clusters(&self) -> bool {
        self.effective_beta() < 1.0
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::DistributionAware,
            beta: DEFAULT_BETA,
        }
    }
}

/// The sampling probability of one transition from the counts alone.
pub fn probability(config: &SamplerConfig, n: usize, num_i: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NotReady("empty buffer".into()));
    }
    let uniform = 1.0 / n as f64;
    match config.strategy {
        Strategy::Uniform => Ok(uniform),
        _ => {
            if num_i == 0 || k == 0 {
                return Err(Error::IndexCorruption(format!(
                    "cluster size {num_i} with {k} nonempty clusters"
                )));
            }
            let cluster = 1.0 / (k as f64 * num_i as f64);
            match config.strategy {
                Strategy::EqualCluster => Ok(cluster),
                _ => Ok(config.beta * uniform + (1.0 - config.beta) * cluster),
            }
        }
    }
}

pub fn probability_of(
    slot: SlotId,
    config: &SamplerConfig,
    buffer: &ReplayBuffer,
    index: &ClusterIndex,
) -> Result<f64> {
    buffer.get(slot)?;
    if config.strategy == Strategy::Uniform {
        return probability(config, buffer.len(), 0, 0);
    }
    let code = index.cluster_of(slot)?;
    probability(config, buffer.len(), index.count(code), index.cluster_count())
}

/// Probabilities of every occupied slot, in slot order.
pub fn probabilities(config: &SamplerConfig, buffer: &ReplayBuffer, index: &ClusterIndex) -> Result<Vec<(SlotId, f64)>> {
    buffer
        .iter()
        .map(|(slot, _)| Ok((slot, probability_of(slot, config, buffer, index)?)))
        .collect()
}

fn draw_uniform<R: Rng + ?Sized>(buffer: &ReplayBuffer, rng: &mut R) -> SlotId {
    SlotId(rng.random_range(0..buffer.len()))
}

fn draw_cluster<R: Rng + ?Sized>(index: &ClusterIndex, rng: &mut R) -> Result<SlotId> {
    let k = index.cluster_count();
    if k == 0 {
        return Err(Error::IndexCorruption("no nonempty clusters".into()));
    }
    let (_, members) = index
        .cluster_at(rng.random_range(0..k))
        .ok_or_else(|| Error::IndexCorruption("cluster position out of range".into()))?;
    Ok(members[rng.random_range(0..members.len())])
}

/// Draws one slot. A `beta` of exactly 0 or 1 skips the mixture coin, so
/// `DistributionAware(1)` consumes the same randomness as `Uniform`.
pub fn sample_one<R: Rng + ?Sized>(
    config: &SamplerConfig,
    buffer: &ReplayBuffer,
    index: &ClusterIndex,
    rng: &mut R,
) -> Result<SlotId> {
    if buffer.is_empty() {
        return Err(Error::NotReady("cannot sample from an empty buffer".into()));
    }
    let beta = config.effective_beta();
    if beta >= 1.0 {
        Ok(draw_uniform(buffer, rng))
    } else if beta <= 0.0 {
        draw_cluster(index, rng)
    } else if rng.random::<f64>() < beta {
        Ok(draw_uniform(buffer, rng))
    } else {
        draw_cluster(index, rng)
    }
}

/// Draws `batch_size` slots i.i.d. (with replacement).
pub fn sample_batch<R: Rng + ?Sized>(
    batch_size: usize,
    config: &SamplerConfig,
    buffer: &ReplayBuffer,
    index: &ClusterIndex,
    rng: &mut R,
) -> Result<Vec<SlotId>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if buffer.is_empty() {
        return Err(Error::NotReady("cannot sample from an empty buffer".into()));
    }
    if config.needs_clusters() && index.total() != buffer.len() {
        return Err(Error::IndexCorruption(format!(
            "index holds {} slots but buffer holds {}",
            index.total(),
            buffer.len()
        )));
    }
    (0..batch_size)
        .map(|_| sample_one(config, buffer, index, rng))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub slot: SlotId,
    pub analytic: f64,
    pub empirical: f64,
    /// `empirical - analytic`
    pub deviation: f64,
    /// Binomial standard error of the empirical frequency.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub draws: usize,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn max_abs_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max)
    }

    /// Largest deviation in units of standard error.
    pub fn max_z(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                if r.std_error > 0.0 {
                    r.deviation.abs() / r.std_error
                } else if r.deviation == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// z threshold such that a correct sampler exceeds it on any of the rows
    /// with probability about `1e-3` (and never below 3).
    pub fn z_threshold(&self) -> f64 {
        let n = self.rows.len().max(1) as f64;
        (2.0 * (2.0 * n / 1e-3).ln()).sqrt().max(3.0)
    }

    pub fn passes(&self) -> bool {
        self.max_z() <= self.z_threshold()
    }
}

/// Draws `draws` slots and compares empirical frequencies with the analytic
/// probabilities for every occupied slot.
pub fn audit_distribution<R: Rng + ?Sized>(
    draws: usize,
    config: &SamplerConfig,
    buffer: &ReplayBuffer,
    index: &ClusterIndex,
    rng: &mut R,
) -> Result<AuditReport> {
    if draws == 0 {
        return Err(Error::Config("audit needs at least one draw".into()));
    }
    if config.needs_clusters() {
        check_consistency(buffer, index)?;
    }
    let analytic = probabilities(config, buffer, index)?;
    let mut hits = vec![0usize; buffer.capacity()];
    for _ in 0..draws {
        hits[sample_one(config, buffer, index, rng)?.0] += 1;
    }
    let rows = analytic
        .into_iter()
        .map(|(slot, p)| {
            let empirical = hits[slot.0] as f64 / draws as f64;
            AuditRow {
                slot,
                analytic: p,
                empirical,
                deviation: empirical - p,
                std_error: (p * (1.0 - p) / draws as f64).sqrt(),
            }
        })
        .collect();
    Ok(AuditReport { draws, rows })
}
