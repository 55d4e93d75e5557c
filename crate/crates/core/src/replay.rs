//! Fixed-capacity transition store.
//!
//! Slots are filled in order `0..capacity` and then overwritten FIFO, so the
//! occupied slots are always exactly `0..len`. A [`SlotId`] handed out by
//! [`ReplayBuffer::insert`] names the same transition until that slot is
//! overwritten; the overwritten transition is handed back to the caller so
//! indices built on top of the buffer can be kept in sync.

use crate::error::{Error, Result};

/// One `(state, action, reward, next_state, done)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// The episode terminated on this transition (time-limit truncation does
    /// not count).
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId(pub usize);

impl SlotId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A transition pushed out of the buffer by an insert, with the slot it
/// occupied.
#[derive(Debug, Clone, PartialEq)]
pub struct Evicted {
    pub slot: SlotId,
    pub transition: Transition,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    slots: Vec<Option<Transition>>,
    write_cursor: usize,
    len: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidInput("buffer capacity must be positive".into()));
        }
        if state_dim == 0 {
            return Err(Error::InvalidInput("state dimension must be positive".into()));
        }
        Ok(Self {
            capacity,
            state_dim,
            slots: vec![None; capacity],
            write_cursor: 0,
            len: 0,
        })
    }

    /// Stores `t`, returning its slot and the transition it displaced (if the
    /// buffer was full).
    pub fn insert(&mut self, t: Transition) -> Result<(SlotId, Option<Evicted>)> {
        if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
            return Err(Error::InvalidInput(format!(
                "transition dimension ({}, {}) does not match buffer dimension {}",
                t.state.len(),
                t.next_state.len(),
                self.state_dim
            )));
        }
        let slot = SlotId(self.write_cursor);
        let evicted = self.slots[slot.0]
            .replace(t)
            .map(|transition| Evicted { slot, transition });
        self.write_cursor = (self.write_cursor + 1) % self.capacity;
        if evicted.is_none() {
            self.len += 1;
        }
        Ok((slot, evicted))
    }

    pub fn get(&self, slot: SlotId) -> Result<&Transition> {
        self.slots
            .get(slot.0)
            .and_then(Option::as_ref)
            .ok_or(Error::InvalidSlot(slot.0))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// The `i`-th occupied slot, for `i < len`.
    pub fn slot_at(&self, i: usize) -> Option<SlotId> {
        (i < self.len).then_some(SlotId(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SlotId, &Transition)> {
        self.slots[..self.len]
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.as_ref().map(|t| (SlotId(i), t)))
    }
}
