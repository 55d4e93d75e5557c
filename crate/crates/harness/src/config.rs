//! Experiment configuration.
//!
//! The file format is one `key = value` per line; `#` starts a comment and
//! lists are comma-separated. Seeds also accept a half-open range `a..b`.
//! Every key can be overridden from the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use replay_core::clustering::{
    ClustererConfig, ClustererKind, DEFAULT_KMEANS_CLUSTERS, DEFAULT_KMEANS_WARMUP, DEFAULT_SIMHASH_CLUSTERS,
};
use replay_core::envs::{ChainMdp, Environment, GridMap, Gridworld, MountainCar, DEFAULT_GRID_MAX_STEPS};
use replay_core::memory::ReplayMemory;
use replay_core::qlearn::{Discretizer, EpsilonSchedule, FeatureMap, QFunction, TrainConfig};
use replay_core::sampling::{SamplerConfig, Strategy, DEFAULT_BETA};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Gridworld,
    Chain,
    MountainCar,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Gridworld => "gridworld",
            EnvKind::Chain => "chain",
            EnvKind::MountainCar => "mountain-car",
        }
    }
}

impl FromStr for EnvKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "gridworld" | "grid" => Ok(EnvKind::Gridworld),
            "chain" => Ok(EnvKind::Chain),
            "mountain-car" | "mountaincar" => Ok(EnvKind::MountainCar),
            other => Err(HarnessError::Config(format!("unknown environment `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QRepr {
    Tabular,
    /// Linear over one-hot discretizer features.
    Linear,
}

/// One training run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub sampler: SamplerConfig,
    pub seed: u64,
}

impl RunSpec {
    pub fn strategy(&self) -> Strategy {
        self.sampler.strategy()
    }

    pub fn beta(&self) -> f64 {
        self.sampler.effective_beta()
    }

    pub fn run_id(&self) -> String {
        format!("{}-b{}-s{}", self.strategy(), self.beta(), self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub grid_map: Option<PathBuf>,
    pub grid_width: usize,
    pub grid_height: usize,
    pub chain_states: usize,
    pub chain_slip: f64,
    /// Episode limit T; defaults to the environment's own.
    pub max_steps: Option<usize>,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of `episodes * T` over which epsilon anneals.
    pub epsilon_anneal_fraction: f64,
    pub episodes: usize,
    pub target_sync: u64,
    pub batch_size: usize,
    pub warmup_transitions: usize,
    pub buffer_size: usize,
    pub clusterer: ClustererKind,
    /// Defaults to 64 for k-means and 128 for SimHash.
    pub clusters: Option<usize>,
    pub kmeans_warmup: usize,
    pub strategies: Vec<Strategy>,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub out: PathBuf,
    pub q: QRepr,
    pub bins: Option<Vec<usize>>,
    pub audit_draws: usize,
    pub report_steps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::MountainCar,
            grid_map: None,
            grid_width: 10,
            grid_height: 10,
            chain_states: 3,
            chain_slip: 0.0,
            max_steps: None,
            alpha: 0.1,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_anneal_fraction: 0.1,
            episodes: 500,
            target_sync: 500,
            batch_size: 32,
            warmup_transitions: 1000,
            buffer_size: 50_000,
            clusterer: ClustererKind::KMeans,
            clusters: None,
            kmeans_warmup: DEFAULT_KMEANS_WARMUP,
            strategies: vec![Strategy::Uniform, Strategy::DistributionAware],
            betas: vec![DEFAULT_BETA],
            seeds: vec![0, 1, 2],
            master_seed: 0,
            out: PathBuf::from("results"),
            q: QRepr::Tabular,
            bins: None,
            audit_draws: 1_000_000,
            report_steps: 100_000,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (u64, u64) = (parse("seeds", a)?, parse("seeds", b)?);
        return Ok((a..b).collect());
    }
    parse_list("seeds", value)
}

pub const KEYS: &[&str] = &[
    "env",
    "grid_map",
    "grid_width",
    "grid_height",
    "chain_states",
    "chain_slip",
    "max_steps",
    "alpha",
    "gamma",
    "epsilon_start",
    "epsilon_end",
    "epsilon_anneal_fraction",
    "episodes",
    "target_sync",
    "batch_size",
    "warmup_transitions",
    "buffer_size",
    "clusterer",
    "clusters",
    "kmeans_warmup",
    "strategies",
    "betas",
    "seeds",
    "master_seed",
    "out",
    "q",
    "bins",
    "audit_draws",
    "report_steps",
];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.replace('-', "_").as_str() {
            "env" => self.env = value.parse()?,
            "grid_map" => self.grid_map = Some(PathBuf::from(value)),
            "grid_width" => self.grid_width = parse(key, value)?,
            "grid_height" => self.grid_height = parse(key, value)?,
            "chain_states" => self.chain_states = parse(key, value)?,
            "chain_slip" => self.chain_slip = parse(key, value)?,
            "max_steps" => self.max_steps = Some(parse(key, value)?),
            "alpha" => self.alpha = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "epsilon_start" => self.epsilon_start = parse(key, value)?,
            "epsilon_end" => self.epsilon_end = parse(key, value)?,
            "epsilon_anneal_fraction" => self.epsilon_anneal_fraction = parse(key, value)?,
            "episodes" => self.episodes = parse(key, value)?,
            "target_sync" => self.target_sync = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "warmup_transitions" => self.warmup_transitions = parse(key, value)?,
            "buffer_size" => self.buffer_size = parse(key, value)?,
            "clusterer" => {
                self.clusterer = match value.trim().to_ascii_lowercase().as_str() {
                    "kmeans" | "k-means" => ClustererKind::KMeans,
                    "simhash" => ClustererKind::SimHash,
                    other => return Err(HarnessError::Config(format!("unknown clusterer `{other}`"))),
                }
            }
            "clusters" => self.clusters = Some(parse(key, value)?),
            "kmeans_warmup" => self.kmeans_warmup = parse(key, value)?,
            "strategies" | "strategy" => {
                self.strategies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Strategy>().map_err(|e| HarnessError::Config(e.to_string())))
                    .collect::<Result<_>>()?
            }
            "betas" | "beta" => self.betas = parse_list(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "master_seed" => self.master_seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "q" => {
                self.q = match value.trim() {
                    "tabular" => QRepr::Tabular,
                    "linear" => QRepr::Linear,
                    other => return Err(HarnessError::Config(format!("unknown Q representation `{other}`"))),
                }
            }
            "bins" => self.bins = Some(parse_list(key, value)?),
            "audit_draws" => self.audit_draws = parse(key, value)?,
            "report_steps" => self.report_steps = parse(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.to_string()));
        if self.strategies.is_empty() {
            return bad("at least one strategy is required");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.strategies.contains(&Strategy::DistributionAware) && self.betas.is_empty() {
            return bad("distribution-aware sampling needs at least one beta");
        }
        if self.betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return bad("every beta must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_anneal_fraction) {
            return bad("epsilon_anneal_fraction must lie in [0, 1]");
        }
        if self.buffer_size == 0 {
            return bad("buffer_size must be positive");
        }
        if let Some(bins) = &self.bins {
            if bins.len() != self.state_dim() || bins.contains(&0) {
                return bad("bins must give one positive count per state dimension");
            }
        }
        // surface environment and learner errors early
        self.make_env(0)?;
        self.train_config(RunSpec {
            sampler: SamplerConfig::uniform(),
            seed: 0,
        })
        .validate()?;
        ReplayMemory::new(self.buffer_size, self.state_dim(), self.clusterer_config(), 0)?;
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        match self.env {
            EnvKind::Gridworld | EnvKind::MountainCar => 2,
            EnvKind::Chain => 1,
        }
    }

    pub fn clusterer_config(&self) -> ClustererConfig {
        match self.clusterer {
            ClustererKind::KMeans => ClustererConfig::kmeans(
                self.clusters.unwrap_or(DEFAULT_KMEANS_CLUSTERS),
                self.kmeans_warmup,
            ),
            ClustererKind::SimHash => ClustererConfig::simhash(self.clusters.unwrap_or(DEFAULT_SIMHASH_CLUSTERS)),
        }
    }

    pub fn grid_map(&self) -> Result<GridMap> {
        match &self.grid_map {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| HarnessError::Config(format!("cannot read grid map {}: {e}", path.display())))?;
                Ok(GridMap::parse(&text)?)
            }
            None => Ok(GridMap::open(
                self.grid_width,
                self.grid_height,
                (0, 0),
                (self.grid_width.saturating_sub(1), self.grid_height.saturating_sub(1)),
            )?),
        }
    }

    pub fn make_env(&self, seed: u64) -> Result<Box<dyn Environment>> {
        Ok(match self.env {
            EnvKind::Gridworld => Box::new(Gridworld::with_rewards(
                self.grid_map()?,
                -1.0,
                0.0,
                self.max_steps.unwrap_or(DEFAULT_GRID_MAX_STEPS),
            )),
            EnvKind::Chain => Box::new(ChainMdp::new(
                self.chain_states,
                self.chain_slip,
                self.max_steps.unwrap_or(100),
                seed,
            )?),
            EnvKind::MountainCar => Box::new(MountainCar::with_max_steps(
                self.max_steps.unwrap_or(replay_core::envs::MountainCar::new(0).spec().max_steps),
                seed,
            )),
        })
    }

    pub fn make_q(&self, env: &dyn Environment) -> Result<QFunction> {
        let spec = env.spec();
        let disc = match &self.bins {
            Some(bins) => Discretizer::with_bins(spec, bins.clone())?,
            None => Discretizer::for_spec(spec)?,
        };
        Ok(match self.q {
            QRepr::Tabular => QFunction::tabular(disc, spec.action_count),
            QRepr::Linear => QFunction::linear(FeatureMap::OneHot(disc), spec.action_count),
        })
    }

    pub fn make_memory(&self, seed: u64) -> Result<ReplayMemory> {
        Ok(ReplayMemory::new(
            self.buffer_size,
            self.state_dim(),
            self.clusterer_config(),
            seed,
        )?)
    }

    pub fn train_config(&self, run: RunSpec) -> TrainConfig {
        let max_steps = self.max_steps.unwrap_or(match self.env {
            EnvKind::Gridworld => DEFAULT_GRID_MAX_STEPS,
            EnvKind::Chain => 100,
            EnvKind::MountainCar => replay_core::envs::MountainCar::new(0).spec().max_steps,
        });
        let budget = (self.episodes * max_steps) as f64;
        TrainConfig {
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: EpsilonSchedule {
                start: self.epsilon_start,
                end: self.epsilon_end,
                anneal_steps: (budget * self.epsilon_anneal_fraction) as u64,
            },
            episodes: self.episodes,
            max_steps_per_episode: max_steps,
            target_sync_interval: self.target_sync,
            batch_size: self.batch_size,
            warmup_transitions: self.warmup_transitions,
            sampler: run.sampler,
            seed: run.seed,
        }
    }

    /// Every (strategy, beta, seed) combination, strategies outermost.
    pub fn runs(&self) -> Result<Vec<RunSpec>> {
        let mut runs = Vec::new();
        for &strategy in &self.strategies {
            let samplers: Vec<SamplerConfig> = match strategy {
                Strategy::Uniform => vec![SamplerConfig::uniform()],
                Strategy::EqualCluster => vec![SamplerConfig::equal_cluster()],
                Strategy::DistributionAware => self
                    .betas
                    .iter()
                    .map(|&b| SamplerConfig::distribution_aware(b))
                    .collect::<Result<_, _>>()?,
            };
            for sampler in samplers {
                for &seed in &self.seeds {
                    runs.push(RunSpec { sampler, seed });
                }
            }
        }
        Ok(runs)
    }

    /// The configuration in file syntax.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[String]| v.join(",");
        let _ = writeln!(s, "env = {}", self.env.name());
        if let Some(p) = &self.grid_map {
            let _ = writeln!(s, "grid_map = {}", p.display());
        }
        let _ = writeln!(s, "grid_width = {}", self.grid_width);
        let _ = writeln!(s, "grid_height = {}", self.grid_height);
        let _ = writeln!(s, "chain_states = {}", self.chain_states);
        let _ = writeln!(s, "chain_slip = {}", self.chain_slip);
        if let Some(t) = self.max_steps {
            let _ = writeln!(s, "max_steps = {t}");
        }
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "epsilon_start = {}", self.epsilon_start);
        let _ = writeln!(s, "epsilon_end = {}", self.epsilon_end);
        let _ = writeln!(s, "epsilon_anneal_fraction = {}", self.epsilon_anneal_fraction);
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(s, "target_sync = {}", self.target_sync);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "warmup_transitions = {}", self.warmup_transitions);
        let _ = writeln!(s, "buffer_size = {}", self.buffer_size);
        let clusterer = match self.clusterer {
            ClustererKind::KMeans => "kmeans",
            ClustererKind::SimHash => "simhash",
        };
        let _ = writeln!(s, "clusterer = {clusterer}");
        let _ = writeln!(s, "clusters = {}", self.clusterer_config().clusters);
        let _ = writeln!(s, "kmeans_warmup = {}", self.kmeans_warmup);
        let strategies: Vec<String> = self.strategies.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(s, "strategies = {}", list(&strategies));
        let betas: Vec<String> = self.betas.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "betas = {}", list(&betas));
        let seeds: Vec<String> = self.seeds.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(s, "seeds = {}", list(&seeds));
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "q = {}", if self.q == QRepr::Tabular { "tabular" } else { "linear" });
        if let Some(bins) = &self.bins {
            let bins: Vec<String> = bins.iter().map(|b| b.to_string()).collect();
            let _ = writeln!(s, "bins = {}", list(&bins));
        }
        let _ = writeln!(s, "audit_draws = {}", self.audit_draws);
        let _ = writeln!(s, "report_steps = {}", self.report_steps);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_syntax() {
        let mut c = ExperimentConfig::default();
        c.apply_text(
            "# sweep\nenv = gridworld\nstrategies = uniform, distribution-aware\nbetas = 0, 0.5 ,1\nseeds = 2..5\n\nbuffer_size = 10000 # small\n",
        )
        .unwrap();
        assert_eq!(c.env, EnvKind::Gridworld);
        assert_eq!(c.betas, vec![0.0, 0.5, 1.0]);
        assert_eq!(c.seeds, vec![2, 3, 4]);
        assert_eq!(c.buffer_size, 10_000);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_values_are_config_errors() {
        let mut c = ExperimentConfig::default();
        assert!(matches!(c.set("colour", "red"), Err(HarnessError::Config(_))));
        assert!(matches!(c.set("episodes", "many"), Err(HarnessError::Config(_))));
        assert!(matches!(c.set("strategies", "greedy"), Err(HarnessError::Config(_))));
        assert!(matches!(c.apply_text("no equals sign"), Err(HarnessError::Config(_))));
    }

    #[test]
    fn validation_catches_bad_sweeps() {
        let mut c = ExperimentConfig::default();
        c.seeds.clear();
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.betas = vec![1.5];
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.buffer_size = 10;
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn runs_expand_strategies_betas_and_seeds() {
        let mut c = ExperimentConfig::default();
        c.strategies = vec![Strategy::Uniform, Strategy::DistributionAware, Strategy::EqualCluster];
        c.betas = vec![0.25, 0.75];
        c.seeds = vec![0, 1, 2];
        let runs = c.runs().unwrap();
        assert_eq!(runs.len(), 3 + 6 + 3);
        assert_eq!(runs[0].run_id(), "uniform-b1-s0");
        assert_eq!(runs[3].run_id(), "distribution-aware-b0.25-s0");
        assert_eq!(runs[11].run_id(), "equal-cluster-b0-s2");
    }

    #[test]
    fn text_round_trips() {
        let mut c = ExperimentConfig::default();
        c.apply_text("env = chain\nbins = 3\nseeds = 4,9\nmax_steps = 20\nclusterer = simhash").unwrap();
        let mut d = ExperimentConfig::default();
        d.apply_text(&c.to_text()).unwrap();
        // `clusters` is written out explicitly
        c.clusters = Some(c.clusterer_config().clusters);
        assert_eq!(c, d);
    }

    #[test]
    fn epsilon_anneals_over_a_tenth_of_the_budget() {
        let c = ExperimentConfig::default();
        let t = c.train_config(RunSpec {
            sampler: SamplerConfig::uniform(),
            seed: 0,
        });
        assert_eq!(t.epsilon.anneal_steps, (500 * 200) / 10);
    }
}
