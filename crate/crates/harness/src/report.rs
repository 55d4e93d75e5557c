//! Cluster occupancy reports.

use std::fmt::Write as _;

use rand::Rng as _;
use serde::Serialize;

use replay_core::clustering::{ClusterCode, ClusterIndex};
use replay_core::envs::Environment;
use replay_core::memory::ReplayMemory;
use replay_core::replay::Transition;
use replay_core::rng;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub code: ClusterCode,
    pub count: usize,
    pub share: f64,
    pub cumulative_share: f64,
}

/// Nonempty clusters, largest first (ties by code).
pub fn cluster_report(index: &ClusterIndex) -> Vec<ClusterRow> {
    let mut clusters = index.nonempty_clusters();
    clusters.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let total: usize = clusters.iter().map(|(_, c)| c).sum();
    let mut running = 0;
    clusters
        .into_iter()
        .map(|(code, count)| {
            running += count;
            ClusterRow {
                code,
                count,
                share: count as f64 / total as f64,
                cumulative_share: running as f64 / total as f64,
            }
        })
        .collect()
}

/// Share of transitions held by the largest 20% of nonempty clusters
/// (rounded down, at least one cluster).
pub fn top_fifth_share(rows: &[ClusterRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let top = (rows.len() / 5).max(1);
    rows[top - 1].cumulative_share
}

pub fn render(rows: &[ClusterRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>20} {:>8} {:>8} {:>8}", "cluster", "count", "share", "cum");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>20} {:>8} {:>8.4} {:>8.4}",
            r.code, r.count, r.share, r.cumulative_share
        );
    }
    let _ = writeln!(
        s,
        "{} clusters; top 20% hold {:.1}% of transitions",
        rows.len(),
        100.0 * top_fifth_share(rows)
    );
    s
}

/// Fills `memory` with `steps` transitions from a uniformly random policy.
pub fn fill_random(env: &mut dyn Environment, memory: &mut ReplayMemory, steps: usize, seed: u64) -> Result<()> {
    let actions = env.spec().action_count;
    let mut r = rng::stream(seed, rng::streams::POLICY);
    let mut state = env.reset();
    for _ in 0..steps {
        let action = r.random_range(0..actions);
        let step = env.step(action)?;
        let done = step.terminated();
        let over = step.done;
        let next = step.next_state;
        memory.push(Transition {
            state: std::mem::replace(&mut state, next.clone()),
            action,
            reward: step.reward,
            next_state: next,
            done,
        })?;
        if over {
            state = env.reset();
        }
    }
    Ok(())
}
