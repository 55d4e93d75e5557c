//! Exact per-cluster membership for the slots of a replay buffer.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::replay::SlotId;

pub type ClusterCode = u64;

/// Cluster code → member slots, with O(1) insert, remove, and uniform access
/// by position. Only nonempty clusters are kept.
#[derive(Debug, Clone, Default)]
pub struct ClusterIndex {
    clusters: IndexMap<ClusterCode, Vec<SlotId>>,
    // slot → (code, position inside that cluster's member list)
    positions: Vec<Option<(ClusterCode, usize)>>,
    total: usize,
}

impl ClusterIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, slot: SlotId, code: ClusterCode) -> Result<()> {
        if let Some(Some((existing, _))) = self.positions.get(slot.0) {
            return Err(Error::IndexCorruption(format!(
                "slot {} already indexed under cluster {existing}",
                slot.0
            )));
        }
        if self.positions.len() <= slot.0 {
            self.positions.resize(slot.0 + 1, None);
        }
        let members = self.clusters.entry(code).or_default();
        self.positions[slot.0] = Some((code, members.len()));
        members.push(slot);
        self.total += 1;
        Ok(())
    }

    pub fn remove(&mut self, slot: SlotId, code: ClusterCode) -> Result<()> {
        let pos = match self.positions.get(slot.0) {
            Some(Some((c, pos))) if *c == code => *pos,
            Some(Some((c, _))) => {
                return Err(Error::IndexCorruption(format!(
                    "slot {} is indexed under cluster {c}, not {code}",
                    slot.0
                )))
            }
            _ => {
                return Err(Error::IndexCorruption(format!(
                    "slot {} is not indexed",
                    slot.0
                )))
            }
        };
        let members = self
            .clusters
            .get_mut(&code)
            .ok_or_else(|| Error::IndexCorruption(format!("cluster {code} missing")))?;
        members.swap_remove(pos);
        if let Some(&moved) = members.get(pos) {
            self.positions[moved.0] = Some((code, pos));
        }
        if members.is_empty() {
            self.clusters.swap_remove(&code);
        }
        self.positions[slot.0] = None;
        self.total -= 1;
        Ok(())
    }

    pub fn contains(&self, slot: SlotId) -> bool {
        matches!(self.positions.get(slot.0), Some(Some(_)))
    }

    pub fn cluster_of(&self, slot: SlotId) -> Result<ClusterCode> {
        match self.positions.get(slot.0) {
            Some(Some((code, _))) => Ok(*code),
            _ => Err(Error::IndexCorruption(format!("slot {} is not indexed", slot.0))),
        }
    }

    /// h(c); zero for codes with no members.
    pub fn count(&self, code: ClusterCode) -> usize {
        self.clusters.get(&code).map_or(0, Vec::len)
    }

    pub fn members(&self, code: ClusterCode) -> &[SlotId] {
        self.clusters.get(&code).map_or(&[], Vec::as_slice)
    }

    /// Number of nonempty clusters.
    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Total number of indexed slots.
    pub fn total(&self) -> usize {
        self.total
    }

    /// The `i`-th nonempty cluster, `i < cluster_count()`. Order is
    /// deterministic given the insert/remove history.
    pub fn cluster_at(&self, i: usize) -> Option<(ClusterCode, &[SlotId])> {
        self.clusters.get_index(i).map(|(c, m)| (*c, m.as_slice()))
    }

    pub fn nonempty_clusters(&self) -> Vec<(ClusterCode, usize)> {
        self.clusters.iter().map(|(c, m)| (*c, m.len())).collect()
    }

    /// Checks internal bookkeeping: every member's recorded position points
    /// back at it and the total matches.
    pub fn check(&self) -> Result<()> {
        let mut seen = 0;
        for (&code, members) in &self.clusters {
            if members.is_empty() {
                return Err(Error::IndexCorruption(format!("empty cluster {code} retained")));
            }
            for (pos, slot) in members.iter().enumerate() {
                if self.positions.get(slot.0).copied().flatten() != Some((code, pos)) {
                    return Err(Error::IndexCorruption(format!(
                        "slot {} position out of sync",
                        slot.0
                    )));
                }
            }
            seen += members.len();
        }
        let indexed = self.positions.iter().filter(|p| p.is_some()).count();
        if seen != self.total || indexed != self.total {
            return Err(Error::IndexCorruption(format!(
                "total {} but {seen} members and {indexed} indexed slots",
                self.total
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    #[test]
    fn insert_counts_and_cluster_of() {
        let mut idx = ClusterIndex::new();
        idx.insert(SlotId(5), 7).unwrap();
        assert_eq!(idx.count(7), 1);
        assert_eq!(idx.cluster_of(SlotId(5)).unwrap(), 7);
        assert_eq!(idx.nonempty_clusters(), vec![(7, 1)]);
    }

    #[test]
    fn remove_drops_empty_cluster() {
        let mut idx = ClusterIndex::new();
        idx.insert(SlotId(5), 7).unwrap();
        idx.remove(SlotId(5), 7).unwrap();
        assert_eq!(idx.count(7), 0);
        assert!(idx.nonempty_clusters().is_empty());
        assert_eq!(idx.cluster_count(), 0);
        idx.check().unwrap();
    }

    #[test]
    fn counts_sum_to_total() {
        let mut idx = ClusterIndex::new();
        let mut slot = 0;
        for (code, n) in [(1u64, 8usize), (2, 2), (3, 1)] {
            for _ in 0..n {
                idx.insert(SlotId(slot), code).unwrap();
                slot += 1;
            }
        }
        let total: usize = idx.nonempty_clusters().iter().map(|(_, c)| c).sum();
        assert_eq!(total, 11);
        assert_eq!(idx.total(), 11);
    }

    #[test]
    fn corruption_is_reported() {
        let mut idx = ClusterIndex::new();
        idx.insert(SlotId(0), 1).unwrap();
        assert!(matches!(idx.insert(SlotId(0), 2), Err(Error::IndexCorruption(_))));
        assert!(matches!(idx.remove(SlotId(0), 2), Err(Error::IndexCorruption(_))));
        assert!(matches!(idx.remove(SlotId(3), 1), Err(Error::IndexCorruption(_))));
        assert!(matches!(idx.cluster_of(SlotId(3)), Err(Error::IndexCorruption(_))));
    }

    proptest! {
        // Shadow oracle: slot → code map, counts recomputed from scratch.
        #[test]
        fn matches_shadow_oracle(ops in prop::collection::vec((0usize..40, 0u64..6, any::<bool>()), 0..2000)) {
            let mut idx = ClusterIndex::new();
            let mut shadow: BTreeMap<usize, u64> = BTreeMap::new();
            for (slot, code, insert) in ops {
                if insert {
                    let r = idx.insert(SlotId(slot), code);
                    if shadow.contains_key(&slot) {
                        prop_assert!(r.is_err());
                    } else {
                        r.unwrap();
                        shadow.insert(slot, code);
                    }
                } else if let Some(&c) = shadow.get(&slot) {
                    idx.remove(SlotId(slot), c).unwrap();
                    shadow.remove(&slot);
                } else {
                    prop_assert!(idx.remove(SlotId(slot), code).is_err());
                }
                let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
                for &c in shadow.values() {
                    *counts.entry(c).or_default() += 1;
                }
                let got: BTreeMap<u64, usize> = idx.nonempty_clusters().into_iter().collect();
                prop_assert_eq!(&got, &counts);
                prop_assert_eq!(idx.total(), shadow.len());
                for (&code, &n) in &counts {
                    let members: BTreeSet<usize> = idx.members(code).iter().map(|s| s.0).collect();
                    prop_assert_eq!(members.len(), n);
                    for m in members {
                        prop_assert_eq!(shadow[&m], code);
                    }
                }
            }
            idx.check().unwrap();
        }
    }
}
