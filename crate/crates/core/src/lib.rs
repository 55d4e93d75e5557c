//! Experience replay with state distribution-aware sampling.
//!
//! Transitions live in a fixed-capacity [`replay::ReplayBuffer`]. Each stored
//! transition's first state is assigned to a cluster ([`clustering`]), and the
//! [`clustering::ClusterIndex`] keeps exact per-cluster counts as transitions
//! arrive and are evicted. [`sampling`] mixes uniform replay with equal-cluster
//! replay,
//!
//! ```text
//! p_i = beta / n + (1 - beta) / (k * num_i)
//! ```
//!
//! where `n` is the number of stored transitions, `k` the number of nonempty
//! clusters and `num_i` the size of transition `i`'s cluster. [`qlearn`] runs
//! the full Q-learning loop (target network, epsilon-greedy behaviour) on the
//! small environments in [`envs`], which also provide value-iteration oracles.

pub mod clustering;
pub mod envs;
pub mod error;
pub mod memory;
pub mod qlearn;
pub mod replay;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
