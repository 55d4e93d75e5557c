//! Small deterministic environments and exact planning oracles.

mod chain;
mod gridworld;
mod mountain_car;
mod planning;

pub use chain::ChainMdp;
pub use gridworld::{GridMap, Gridworld, DEFAULT_GRID_MAX_STEPS};
pub use mountain_car::MountainCar;
pub use planning::{value_iteration, FiniteMdp, Outcome, QTable, TableMdp, DEFAULT_VI_MAX_ITERATIONS};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    pub action_count: usize,
    pub lows: Vec<f64>,
    pub highs: Vec<f64>,
    /// Episode length limit T.
    pub max_steps: usize,
    /// Per-dimension bins of the natural tabular discretization.
    pub bins: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    pub reward: f64,
    /// The episode is over, either terminated or cut off at `max_steps`.
    pub done: bool,
    /// Set when `done` comes only from the step limit.
    pub truncated: bool,
}

impl StepResult {
    pub fn terminated(&self) -> bool {
        self.done && !self.truncated
    }
}

/// A seeded episodic environment. Its trajectory is a pure function of the
/// construction seed and the action sequence.
pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self) -> Vec<f64>;

    /// Fails if called after the episode ended and before `reset`.
    fn step(&mut self, action: usize) -> Result<StepResult>;
}

/// Tracks the step limit and the reset requirement shared by every
/// environment.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    needs_reset: bool,
}

impl EpisodeClock {
    pub(crate) fn reset(&mut self) {
        self.steps = 0;
        self.needs_reset = false;
    }

    pub(crate) fn begin_step(&self, spec: &EnvSpec, action: usize) -> Result<()> {
        use crate::error::Error;
        if self.needs_reset {
            return Err(Error::Env(format!("{}: step after episode end without reset", spec.name)));
        }
        if action >= spec.action_count {
            return Err(Error::Env(format!(
                "{}: action {action} out of range (action count {})",
                spec.name, spec.action_count
            )));
        }
        Ok(())
    }

    /// Returns `(done, truncated)`.
    pub(crate) fn finish_step(&mut self, max_steps: usize, terminated: bool) -> (bool, bool) {
        self.steps += 1;
        let truncated = !terminated && self.steps >= max_steps;
        self.needs_reset = terminated || truncated;
        (self.needs_reset, truncated)
    }
}
