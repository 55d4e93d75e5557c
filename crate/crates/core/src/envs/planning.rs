//! Finite MDP models and value iteration.

use crate::error::{Error, Result};

pub const DEFAULT_VI_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub next: usize,
    pub reward: f64,
    /// The episode terminates on arrival at `next`.
    pub terminal: bool,
}

pub trait FiniteMdp {
    fn state_count(&self) -> usize;

    fn action_count(&self) -> usize;

    /// Terminal states have no outgoing transitions; their values are 0.
    fn is_terminal(&self, state: usize) -> bool;

    fn outcomes(&self, state: usize, action: usize) -> Vec<Outcome>;

    /// Index of an observation in this model's state numbering.
    fn state_index(&self, observation: &[f64]) -> Option<usize>;
}

/// An explicit table of outcomes, mainly for tests.
#[derive(Debug, Clone)]
pub struct TableMdp {
    pub action_count: usize,
    pub terminal: Vec<bool>,
    /// `[state][action]`
    pub outcomes: Vec<Vec<Vec<Outcome>>>,
}

impl FiniteMdp for TableMdp {
    fn state_count(&self) -> usize {
        self.terminal.len()
    }

    fn action_count(&self) -> usize {
        self.action_count
    }

    fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    fn outcomes(&self, state: usize, action: usize) -> Vec<Outcome> {
        self.outcomes[state][action].clone()
    }

    fn state_index(&self, observation: &[f64]) -> Option<usize> {
        let s = *observation.first()?;
        (s >= 0.0 && s.fract() == 0.0 && (s as usize) < self.state_count()).then_some(s as usize)
    }
}

/// Q values indexed `[state * actions + action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(states: usize, actions: usize) -> Self {
        Self {
            states,
            actions,
            values: vec![0.0; states * actions],
        }
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    pub fn value(&self, state: usize) -> f64 {
        self.row(state).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    fn backup(&self, mdp: &dyn FiniteMdp, gamma: f64, state: usize, action: usize) -> f64 {
        mdp.outcomes(state, action)
            .iter()
            .map(|o| {
                let future = if o.terminal || mdp.is_terminal(o.next) {
                    0.0
                } else {
                    self.value(o.next)
                };
                o.probability * (o.reward + gamma * future)
            })
            .sum()
    }

    /// max over non-terminal (s, a) of |Q(s,a) - E[r + gamma * max_a' Q(s',a')]|.
    pub fn bellman_residual(&self, mdp: &dyn FiniteMdp, gamma: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for s in (0..self.states).filter(|&s| !mdp.is_terminal(s)) {
            for a in 0..self.actions {
                worst = worst.max((self.get(s, a) - self.backup(mdp, gamma, s, a)).abs());
            }
        }
        worst
    }
}

/// Synchronous value iteration on Q until the Bellman residual drops below
/// `tol`.
pub fn value_iteration(mdp: &dyn FiniteMdp, gamma: f64, tol: f64, max_iterations: usize) -> Result<QTable> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("discount must lie in [0, 1], got {gamma}")));
    }
    if tol <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let (states, actions) = (mdp.state_count(), mdp.action_count());
    let mut q = QTable::zeros(states, actions);
    for _ in 0..max_iterations {
        let mut next = QTable::zeros(states, actions);
        let mut change: f64 = 0.0;
        for s in (0..states).filter(|&s| !mdp.is_terminal(s)) {
            for a in 0..actions {
                let v = q.backup(mdp, gamma, s, a);
                change = change.max((v - q.get(s, a)).abs());
                next.values[s * actions + a] = v;
            }
        }
        q = next;
        if change < tol {
            return Ok(q);
        }
        if q.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFault("value iteration diverged".into()));
        }
    }
    Err(Error::NumericFault(format!(
        "value iteration did not converge within {max_iterations} sweeps"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loop_with_zero_reward_is_zero() {
        let mdp = TableMdp {
            action_count: 1,
            terminal: vec![false],
            outcomes: vec![vec![vec![Outcome {
                probability: 1.0,
                next: 0,
                reward: 0.0,
                terminal: false,
            }]]],
        };
        let q = value_iteration(&mdp, 0.9, 1e-12, 100).unwrap();
        assert_eq!(q.get(0, 0), 0.0);
    }

    #[test]
    fn non_convergence_is_an_error() {
        // undiscounted self-loop paying 1 forever
        let mdp = TableMdp {
            action_count: 1,
            terminal: vec![false],
            outcomes: vec![vec![vec![Outcome {
                probability: 1.0,
                next: 0,
                reward: 1.0,
                terminal: false,
            }]]],
        };
        assert!(matches!(value_iteration(&mdp, 1.0, 1e-9, 1000), Err(Error::NumericFault(_))));
    }
}
