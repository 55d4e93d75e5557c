//! Replay buffer and cluster index kept in lockstep.
//!
//! Every insert computes the new transition's cluster code and bumps that
//! cluster's count; every eviction removes the evicted slot from its cluster.
//! With a k-means clusterer, transitions stored before the model is fitted are
//! indexed in one pass when it is.

use crate::clustering::{ClusterIndex, Clusterer, ClustererConfig};
use crate::error::{Error, Result};
use crate::replay::{ReplayBuffer, SlotId, Transition};

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    buffer: ReplayBuffer,
    index: ClusterIndex,
    clusterer: Clusterer,
}

impl ReplayMemory {
    pub fn new(capacity: usize, state_dim: usize, clustering: ClustererConfig, seed: u64) -> Result<Self> {
        let buffer = ReplayBuffer::new(capacity, state_dim)?;
        let clusterer = Clusterer::new(clustering, state_dim, seed)?;
        if !clusterer.is_ready() && capacity < clustering.clusters {
            return Err(Error::Config(format!(
                "buffer capacity {capacity} cannot hold enough states to fit k={} centroids",
                clustering.clusters
            )));
        }
        Ok(Self {
            buffer,
            index: ClusterIndex::new(),
            clusterer,
        })
    }

    pub fn push(&mut self, t: Transition) -> Result<SlotId> {
        let code = if self.clusterer.is_ready() {
            Some(self.clusterer.code(&t.state)?)
        } else {
            None
        };
        let (slot, evicted) = self.buffer.insert(t)?;
        if let Some(ev) = evicted {
            if self.index.contains(ev.slot) {
                let old = self.index.cluster_of(ev.slot)?;
                self.index.remove(ev.slot, old)?;
            }
        }
        match code {
            Some(code) => self.index.insert(slot, code)?,
            None => {
                let threshold = self.clusterer.warmup_size().min(self.buffer.capacity());
                if self.buffer.len() >= threshold {
                    self.fit_and_index()?;
                }
            }
        }
        Ok(slot)
    }

    fn fit_and_index(&mut self) -> Result<()> {
        self.clusterer
            .fit(self.buffer.iter().map(|(_, t)| t.state.as_slice()))?;
        for (slot, t) in self.buffer.iter() {
            let code = self.clusterer.code(&t.state)?;
            self.index.insert(slot, code)?;
        }
        Ok(())
    }

    /// True once every stored transition carries a cluster code.
    pub fn is_indexed(&self) -> bool {
        self.clusterer.is_ready()
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn index(&self) -> &ClusterIndex {
        &self.index
    }

    pub fn clusterer(&self) -> &Clusterer {
        &self.clusterer
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn get(&self, slot: SlotId) -> Result<&Transition> {
        self.buffer.get(slot)
    }

    /// Test hook: drops one slot from the index without touching the buffer,
    /// leaving the two inconsistent.
    #[doc(hidden)]
    pub fn corrupt_index_for_testing(&mut self, slot: SlotId) -> Result<()> {
        let code = self.index.cluster_of(slot)?;
        self.index.remove(slot, code)
    }
}

/// Verifies that the index covers exactly the occupied buffer slots.
pub fn check_consistency(buffer: &ReplayBuffer, index: &ClusterIndex) -> Result<()> {
    if index.total() != buffer.len() {
        return Err(Error::IndexCorruption(format!(
            "index holds {} slots but buffer holds {}",
            index.total(),
            buffer.len()
        )));
    }
    for (slot, _) in buffer.iter() {
        if !index.contains(slot) {
            return Err(Error::IndexCorruption(format!("slot {} is not indexed", slot.0)));
        }
    }
    index.check()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(x: f64) -> Transition {
        Transition {
            state: vec![x],
            action: 0,
            reward: 0.0,
            next_state: vec![x],
            done: false,
        }
    }

    #[test]
    fn kmeans_indexes_backlog_on_fit() {
        let mut m = ReplayMemory::new(10, 1, ClustererConfig::kmeans(2, 4), 0).unwrap();
        for x in [0.0, 0.1, 5.0] {
            m.push(tr(x)).unwrap();
            assert!(!m.is_indexed());
            assert_eq!(m.index().total(), 0);
        }
        m.push(tr(5.1)).unwrap();
        assert!(m.is_indexed());
        assert_eq!(m.index().total(), 4);
        check_consistency(m.buffer(), m.index()).unwrap();
    }

    #[test]
    fn fits_when_buffer_fills_before_warmup() {
        let mut m = ReplayMemory::new(3, 1, ClustererConfig::kmeans(2, 100), 0).unwrap();
        for x in 0..3 {
            m.push(tr(x as f64)).unwrap();
        }
        assert!(m.is_indexed());
        for x in 3..20 {
            m.push(tr(x as f64)).unwrap();
            check_consistency(m.buffer(), m.index()).unwrap();
        }
    }

    #[test]
    fn capacity_below_k_is_rejected() {
        assert!(matches!(
            ReplayMemory::new(3, 1, ClustererConfig::kmeans(4, 10), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn corruption_is_detected() {
        let mut m = ReplayMemory::new(8, 1, ClustererConfig::simhash(4), 0).unwrap();
        for x in 0..5 {
            m.push(tr(x as f64 - 2.0)).unwrap();
        }
        check_consistency(m.buffer(), m.index()).unwrap();
        m.corrupt_index_for_testing(SlotId(2)).unwrap();
        assert!(matches!(
            check_consistency(m.buffer(), m.index()),
            Err(Error::IndexCorruption(_))
        ));
    }
}
