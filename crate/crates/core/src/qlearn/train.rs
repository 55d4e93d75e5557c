use std::collections::VecDeque;

use super::{act_epsilon_greedy, apply_update, sync_target, td_target, QFunction, TargetQ};
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::memory::ReplayMemory;
use crate::replay::Transition;
use crate::rng;
use crate::sampling::{sample_batch, SamplerConfig};

/// Trailing window for the smoothed reward curve.
pub const REWARD_WINDOW: usize = 100;

/// Linear decay from `start` to `end` over `anneal_steps`, then flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub anneal_steps: u64,
}

impl EpsilonSchedule {
    pub fn constant(epsilon: f64) -> Self {
        Self {
            start: epsilon,
            end: epsilon,
            anneal_steps: 0,
        }
    }

    pub fn value(&self, step: u64) -> f64 {
        if step >= self.anneal_steps {
            return self.end;
        }
        let frac = step as f64 / self.anneal_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    /// M
    pub episodes: usize,
    /// T
    pub max_steps_per_episode: usize,
    /// K, in environment steps.
    pub target_sync_interval: u64,
    /// B
    pub batch_size: usize,
    pub warmup_transitions: usize,
    pub sampler: SamplerConfig,
    /// Seeds the policy and sampler streams.
    pub seed: u64,
}

impl TrainConfig {
    /// Defaults for an environment with episode limit `max_steps`: epsilon
    /// anneals 1.0 → 0.05 over the first 10% of the nominal step budget.
    pub fn new(episodes: usize, max_steps: usize) -> Self {
        let budget = (episodes * max_steps) as u64;
        Self {
            alpha: 0.1,
            gamma: 0.99,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.05,
                anneal_steps: budget / 10,
            },
            episodes,
            max_steps_per_episode: max_steps,
            target_sync_interval: 500,
            batch_size: 32,
            warmup_transitions: 1000,
            sampler: SamplerConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("discount must lie in [0, 1], got {}", self.gamma));
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) {
            return bad("epsilon schedule must stay within [0, 1]".into());
        }
        if self.episodes == 0 || self.max_steps_per_episode == 0 {
            return bad("episodes and steps per episode must be positive".into());
        }
        if self.target_sync_interval == 0 || self.batch_size == 0 {
            return bad("target sync interval and batch size must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    /// 1-based.
    pub episode: usize,
    pub total_reward: f64,
    pub steps: usize,
    /// Mean total reward over this and up to 99 preceding episodes.
    pub mean_reward_100: f64,
    /// Environment steps since the start of training, inclusive.
    pub cumulative_steps: u64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub episodes: Vec<EpisodeStats>,
    pub q: QFunction,
    pub target: TargetQ,
    /// Environment step (1-based) after which the first TD update ran.
    pub first_update_step: Option<u64>,
    pub updates: u64,
}

/// Runs Q-learning with replay: each environment step stores the transition
/// (which assigns its cluster), samples one batch under `config.sampler`,
/// applies one TD update per sampled transition against the target
/// parameters, and re-syncs the target every `target_sync_interval` steps.
/// Updates begin once `warmup_transitions` are stored and every stored
/// transition has a cluster.
pub fn train(
    env: &mut dyn Environment,
    mut q: QFunction,
    config: &TrainConfig,
    memory: &mut ReplayMemory,
) -> Result<TrainOutcome> {
    config.validate()?;
    let spec = env.spec().clone();
    if q.action_count() != spec.action_count {
        return Err(Error::Config(format!(
            "Q function has {} actions, environment has {}",
            q.action_count(),
            spec.action_count
        )));
    }
    if memory.buffer().state_dim() != spec.state_dim {
        return Err(Error::Config("replay memory dimension does not match environment".into()));
    }

    let mut policy_rng = rng::stream(config.seed, rng::streams::POLICY);
    let mut sampler_rng = rng::stream(config.seed, rng::streams::SAMPLER);
    let mut target = TargetQ::snapshot(&q);

    let mut stats = Vec::with_capacity(config.episodes);
    let mut window: VecDeque<f64> = VecDeque::with_capacity(REWARD_WINDOW);
    let mut global_step: u64 = 0;
    let mut first_update_step = None;
    let mut updates = 0u64;

    for episode in 1..=config.episodes {
        let mut state = env.reset();
        let mut total_reward = 0.0;
        let mut steps = 0;
        for _ in 0..config.max_steps_per_episode {
            let epsilon = config.epsilon.value(global_step);
            let action = act_epsilon_greedy(&q, &state, epsilon, &mut policy_rng);
            let step = env.step(action)?;
            global_step += 1;
            steps += 1;
            total_reward += step.reward;
            let terminated = step.terminated();
            let episode_over = step.done;
            let next_state = step.next_state;

            memory.push(Transition {
                state: std::mem::replace(&mut state, next_state.clone()),
                action,
                reward: step.reward,
                next_state,
                done: terminated,
            })?;

            if memory.len() >= config.warmup_transitions && memory.is_indexed() {
                let batch = sample_batch(
                    config.batch_size,
                    &config.sampler,
                    memory.buffer(),
                    memory.index(),
                    &mut sampler_rng,
                )?;
                for slot in batch {
                    let t = memory.get(slot)?;
                    let y = td_target(t, &target, config.gamma);
                    apply_update(&mut q, t, y, config.alpha)?;
                }
                updates += config.batch_size as u64;
                first_update_step.get_or_insert(global_step);
            }

            if global_step % config.target_sync_interval == 0 {
                sync_target(&q, &mut target);
            }
            if episode_over {
                break;
            }
        }

        if window.len() == REWARD_WINDOW {
            window.pop_front();
        }
        window.push_back(total_reward);
        let window_sum: f64 = window.iter().sum();
        stats.push(EpisodeStats {
            episode,
            total_reward,
            steps,
            mean_reward_100: window_sum / window.len() as f64,
            cumulative_steps: global_step,
        });
    }

    Ok(TrainOutcome {
        episodes: stats,
        q,
        target,
        first_update_step,
        updates,
    })
}
