use rand::Rng as _;

use super::planning::{FiniteMdp, Outcome};
use super::{EnvSpec, Environment, EpisodeClock, StepResult};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

const LEFT: usize = 0;
const RIGHT: usize = 1;

/// States `0..n`, starting at 0. Action 0 moves left (staying put at 0),
/// action 1 moves right. Reaching `n - 1` pays 1 and ends the episode; every
/// other move pays 0. With `slip > 0` the chosen direction is reversed with
/// that probability.
#[derive(Debug, Clone)]
pub struct ChainMdp {
    n: usize,
    slip: f64,
    spec: EnvSpec,
    pos: usize,
    clock: EpisodeClock,
    rng: Rng,
}

impl ChainMdp {
    pub fn new(n_states: usize, slip: f64, max_steps: usize, seed: u64) -> Result<Self> {
        if n_states < 2 {
            return Err(Error::Config(format!("chain needs at least 2 states, got {n_states}")));
        }
        if !(0.0..=1.0).contains(&slip) {
            return Err(Error::Config(format!("slip must lie in [0, 1], got {slip}")));
        }
        Ok(Self {
            n: n_states,
            slip,
            spec: EnvSpec {
                name: "chain".into(),
                state_dim: 1,
                action_count: 2,
                lows: vec![-0.5],
                highs: vec![n_states as f64 - 0.5],
                max_steps: max_steps.max(1),
                bins: vec![n_states],
            },
            pos: 0,
            clock: EpisodeClock::default(),
            rng: rng::stream(seed, rng::streams::ENV),
        })
    }

    fn moved(&self, pos: usize, action: usize) -> usize {
        match action {
            LEFT => pos.saturating_sub(1),
            _ => (pos + 1).min(self.n - 1),
        }
    }

    fn flip(action: usize) -> usize {
        if action == LEFT {
            RIGHT
        } else {
            LEFT
        }
    }
}

impl Environment for ChainMdp {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.clock.reset();
        self.pos = 0;
        vec![0.0]
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.begin_step(&self.spec, action)?;
        let effective = if self.slip > 0.0 && self.rng.random::<f64>() < self.slip {
            Self::flip(action)
        } else {
            action
        };
        let next = self.moved(self.pos, effective);
        self.pos = next;
        let terminal = next == self.n - 1;
        let (done, truncated) = self.clock.finish_step(self.spec.max_steps, terminal);
        Ok(StepResult {
            next_state: vec![next as f64],
            reward: if terminal { 1.0 } else { 0.0 },
            done,
            truncated,
        })
    }
}

impl FiniteMdp for ChainMdp {
    fn state_count(&self) -> usize {
        self.n
    }

    fn action_count(&self) -> usize {
        2
    }

    fn is_terminal(&self, state: usize) -> bool {
        state == self.n - 1
    }

    fn outcomes(&self, state: usize, action: usize) -> Vec<Outcome> {
        let outcome = |p: f64, a: usize| {
            let next = self.moved(state, a);
            Outcome {
                probability: p,
                next,
                reward: if next == self.n - 1 { 1.0 } else { 0.0 },
                terminal: next == self.n - 1,
            }
        };
        if self.slip > 0.0 {
            vec![outcome(1.0 - self.slip, action), outcome(self.slip, Self::flip(action))]
        } else {
            vec![outcome(1.0, action)]
        }
    }

    fn state_index(&self, observation: &[f64]) -> Option<usize> {
        let s = *observation.first()?;
        (s >= 0.0 && (s as usize) < self.n).then_some(s as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::value_iteration;

    #[test]
    fn three_state_optimal_q() {
        let env = ChainMdp::new(3, 0.0, 100, 0).unwrap();
        let q = value_iteration(&env, 0.9, 1e-12, 10_000).unwrap();
        assert!((q.get(0, RIGHT) - 0.9).abs() < 1e-12);
        assert!((q.get(1, RIGHT) - 1.0).abs() < 1e-12);
        // left at 0 stays at 0, then best is 0.9 discounted
        assert!((q.get(0, LEFT) - 0.81).abs() < 1e-12);
    }

    #[test]
    fn reward_only_on_terminal_transition() {
        let mut env = ChainMdp::new(4, 0.0, 100, 0).unwrap();
        env.reset();
        for a in [RIGHT, LEFT, RIGHT, RIGHT] {
            let r = env.step(a).unwrap();
            assert_eq!(r.reward, 0.0);
            assert!(!r.done);
        }
        let r = env.step(RIGHT).unwrap();
        assert_eq!(r.reward, 1.0);
        assert!(r.terminated());
    }

    #[test]
    fn deterministic_without_slip() {
        let run = |seed| {
            let mut env = ChainMdp::new(5, 0.0, 100, seed).unwrap();
            env.reset();
            (0..4).map(|i| env.step(i % 2).unwrap().next_state[0]).collect::<Vec<_>>()
        };
        assert_eq!(run(1), run(1));
        assert_eq!(run(1), run(2));
    }

    #[test]
    fn slip_is_seeded() {
        let run = |seed| {
            let mut env = ChainMdp::new(50, 0.3, 1000, seed).unwrap();
            env.reset();
            (0..40).map(|_| env.step(RIGHT).unwrap().next_state[0]).collect::<Vec<_>>()
        };
        assert_eq!(run(4), run(4));
        assert_ne!(run(4), run(5));
    }

    #[test]
    fn rejects_short_chain() {
        assert!(ChainMdp::new(1, 0.0, 10, 0).is_err());
    }
}
