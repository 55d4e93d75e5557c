//! Action-value functions and the replay-driven Q-learning loop.

mod train;

pub use train::{train, EpisodeStats, EpsilonSchedule, TrainConfig, TrainOutcome, REWARD_WINDOW};

use rand::Rng;

use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::replay::Transition;

/// Uniform per-dimension binning of a box, flattened with dimension 0 varying
/// fastest. Out-of-range values fall into the edge bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer {
    lows: Vec<f64>,
    highs: Vec<f64>,
    bins: Vec<usize>,
    strides: Vec<usize>,
}

impl Discretizer {
    pub fn new(lows: Vec<f64>, highs: Vec<f64>, bins: Vec<usize>) -> Result<Self> {
        if lows.is_empty() || lows.len() != highs.len() || lows.len() != bins.len() {
            return Err(Error::Config("discretizer bounds and bins must have equal, nonzero length".into()));
        }
        for ((lo, hi), b) in lows.iter().zip(&highs).zip(&bins) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) || *b == 0 {
                return Err(Error::Config(format!("bad discretizer dimension [{lo}, {hi}] x {b}")));
            }
        }
        let mut strides = Vec::with_capacity(bins.len());
        let mut stride = 1;
        for &b in &bins {
            strides.push(stride);
            stride *= b;
        }
        Ok(Self {
            lows,
            highs,
            bins,
            strides,
        })
    }

    pub fn for_spec(spec: &EnvSpec) -> Result<Self> {
        Self::new(spec.lows.clone(), spec.highs.clone(), spec.bins.clone())
    }

    pub fn with_bins(spec: &EnvSpec, bins: Vec<usize>) -> Result<Self> {
        Self::new(spec.lows.clone(), spec.highs.clone(), bins)
    }

    pub fn cell_count(&self) -> usize {
        self.bins.iter().product()
    }

    pub fn index(&self, state: &[f64]) -> usize {
        let mut idx = 0;
        for d in 0..self.bins.len() {
            let frac = (state[d] - self.lows[d]) / (self.highs[d] - self.lows[d]);
            let b = (frac * self.bins[d] as f64).floor();
            let b = if b.is_nan() { 0 } else { b.clamp(0.0, (self.bins[d] - 1) as f64) as usize };
            idx += b * self.strides[d];
        }
        idx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// Indicator of the state's discretizer cell.
    OneHot(Discretizer),
    /// The raw state followed by a constant 1.
    Affine { dim: usize },
}

impl FeatureMap {
    pub fn dim(&self) -> usize {
        match self {
            FeatureMap::OneHot(d) => d.cell_count(),
            FeatureMap::Affine { dim } => dim + 1,
        }
    }

    pub fn features(&self, state: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::OneHot(d) => {
                let mut phi = vec![0.0; d.cell_count()];
                phi[d.index(state)] = 1.0;
                phi
            }
            FeatureMap::Affine { dim } => {
                let mut phi = state[..*dim].to_vec();
                phi.push(1.0);
                phi
            }
        }
    }
}

/// Q(s, a; theta).
#[derive(Debug, Clone, PartialEq)]
pub enum QFunction {
    /// `table[cell * actions + a]`
    Tabular { discretizer: Discretizer, actions: usize, table: Vec<f64> },
    /// `weights[a * dim + i]`
    Linear { features: FeatureMap, actions: usize, weights: Vec<f64> },
}

impl QFunction {
    pub fn tabular(discretizer: Discretizer, actions: usize) -> Self {
        let table = vec![0.0; discretizer.cell_count() * actions];
        QFunction::Tabular {
            discretizer,
            actions,
            table,
        }
    }

    pub fn linear(features: FeatureMap, actions: usize) -> Self {
        let weights = vec![0.0; features.dim() * actions];
        QFunction::Linear {
            features,
            actions,
            weights,
        }
    }

    pub fn action_count(&self) -> usize {
        match self {
            QFunction::Tabular { actions, .. } | QFunction::Linear { actions, .. } => *actions,
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            QFunction::Tabular { table, .. } => table,
            QFunction::Linear { weights, .. } => weights,
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            QFunction::Tabular { table, .. } => table,
            QFunction::Linear { weights, .. } => weights,
        }
    }

    pub fn value(&self, state: &[f64], action: usize) -> f64 {
        match self {
            QFunction::Tabular {
                discretizer,
                actions,
                table,
            } => table[discretizer.index(state) * actions + action],
            QFunction::Linear {
                features, weights, ..
            } => {
                let phi = features.features(state);
                let dim = phi.len();
                weights[action * dim..(action + 1) * dim]
                    .iter()
                    .zip(&phi)
                    .map(|(w, x)| w * x)
                    .sum()
            }
        }
    }

    pub fn values(&self, state: &[f64]) -> Vec<f64> {
        match self {
            QFunction::Tabular {
                discretizer,
                actions,
                table,
            } => {
                let c = discretizer.index(state);
                table[c * actions..(c + 1) * actions].to_vec()
            }
            QFunction::Linear { .. } => (0..self.action_count()).map(|a| self.value(state, a)).collect(),
        }
    }

    pub fn max_value(&self, state: &[f64]) -> f64 {
        match self {
            QFunction::Tabular {
                discretizer,
                actions,
                table,
            } => {
                let c = discretizer.index(state);
                table[c * actions..(c + 1) * actions]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            QFunction::Linear { .. } => self.values(state).into_iter().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// argmax over actions, ties to the lowest index.
    pub fn greedy(&self, state: &[f64]) -> usize {
        argmax(&self.values(state))
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = a;
        }
    }
    best
}

/// Frozen parameters used for TD targets; changed only by [`sync_target`].
#[derive(Debug, Clone, PartialEq)]
pub struct TargetQ(QFunction);

impl TargetQ {
    pub fn snapshot(q: &QFunction) -> Self {
        TargetQ(q.clone())
    }

    pub fn q(&self) -> &QFunction {
        &self.0
    }
}

pub fn sync_target(q: &QFunction, target: &mut TargetQ) {
    target.0.params_mut().copy_from_slice(q.params());
}

/// `r` for a terminal transition, else `r + gamma * max_a' Q_target(s', a')`.
pub fn td_target(t: &Transition, target: &TargetQ, gamma: f64) -> f64 {
    if t.done {
        t.reward
    } else {
        t.reward + gamma * target.0.max_value(&t.next_state)
    }
}

/// One semi-gradient step on `(y - Q(s, a))^2`.
pub fn apply_update(q: &mut QFunction, t: &Transition, y: f64, alpha: f64) -> Result<()> {
    if !y.is_finite() {
        return Err(Error::NumericFault(format!("non-finite TD target {y}")));
    }
    match q {
        QFunction::Tabular {
            discretizer,
            actions,
            table,
        } => {
            let i = discretizer.index(&t.state) * *actions + t.action;
            let next = table[i] + alpha * (y - table[i]);
            if !next.is_finite() {
                return Err(Error::NumericFault(format!("Q value diverged to {next}")));
            }
            table[i] = next;
        }
        QFunction::Linear {
            features, weights, ..
        } => {
            let phi = features.features(&t.state);
            let dim = phi.len();
            let w = &mut weights[t.action * dim..(t.action + 1) * dim];
            let prediction: f64 = w.iter().zip(&phi).map(|(w, x)| w * x).sum();
            let step = alpha * (y - prediction);
            if !step.is_finite() {
                return Err(Error::NumericFault(format!("linear update step {step}")));
            }
            for (wi, xi) in w.iter_mut().zip(&phi) {
                *wi += step * xi;
            }
        }
    }
    Ok(())
}

pub fn act_epsilon_greedy<R: Rng + ?Sized>(q: &QFunction, state: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..q.action_count())
    } else {
        q.greedy(state)
    }
}
