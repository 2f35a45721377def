//! Fixed-capacity index sets backed by 64-bit blocks.
//!
//! Used both for hypothesis sets (version spaces, coverage sets) and for
//! instance sets (query histories). Capacities are small at desk scale, so
//! everything is plain dense popcount arithmetic.

use std::fmt;

const BITS: usize = 64;

/// A set of indices in `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    blocks: Vec<u64>,
    capacity: usize,
}

impl IndexSet {
    pub fn empty(capacity: usize) -> Self {
        IndexSet {
            blocks: vec![0; capacity.div_ceil(BITS)],
            capacity,
        }
    }

    /// The set `{0, 1, ..., capacity - 1}`.
    pub fn full(capacity: usize) -> Self {
        let mut set = Self::empty(capacity);
        for (i, block) in set.blocks.iter_mut().enumerate() {
            let lo = i * BITS;
            let hi = (lo + BITS).min(capacity);
            if hi > lo {
                *block = if hi - lo == BITS {
                    u64::MAX
                } else {
                    (1u64 << (hi - lo)) - 1
                };
            }
        }
        set
    }

    pub fn from_indices(capacity: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(capacity);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.capacity && self.blocks[index / BITS] & (1u64 << (index % BITS)) != 0
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.capacity, "index {index} out of capacity {}", self.capacity);
        self.blocks[index / BITS] |= 1u64 << (index % BITS);
    }

    pub fn remove(&mut self, index: usize) {
        if index < self.capacity {
            self.blocks[index / BITS] &= !(1u64 << (index % BITS));
        }
    }

    /// In-place set difference `self \ other`.
    pub fn subtract(&mut self, other: &IndexSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_count(&self, other: &IndexSet) -> usize {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self ∩ (a ∪ b)|` without building the union.
    pub fn intersect_union_count(&self, a: &IndexSet, b: &IndexSet) -> usize {
        self.blocks
            .iter()
            .zip(a.blocks.iter().zip(&b.blocks))
            .map(|(s, (x, y))| (s & (x | y)).count_ones() as usize)
            .sum()
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(i, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(i * BITS + tz)
                }
            })
        })
    }

    /// Raw blocks, usable as a memoization key component.
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
