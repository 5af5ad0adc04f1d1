//! Integer partitions indexing the terms of Jack-polynomial series.

use std::fmt;

use crate::{Error, Result};

/// A weakly decreasing tuple of positive integers. Trailing zeros are trimmed,
/// so the empty tuple is the unique partition of 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds a partition from parts, trimming trailing zeros.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Precondition(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Caller guarantees `parts` is weakly decreasing with no zeros.
    pub(crate) fn from_sorted(parts: Vec<u32>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        debug_assert!(parts.last() != Some(&0));
        Self(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Largest part κ₁, or 0 for the empty partition.
    pub fn first(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// Part κᵢ with 0-based index, zero past the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// The conjugate partition κ′ (column lengths of the Young diagram).
    pub fn conjugate(&self) -> Partition {
        let cols = self.first() as usize;
        let conj = (0..cols)
            .map(|j| self.0.iter().take_while(|&&k| k as usize > j).count() as u32)
            .collect();
        Partition(conj)
    }

    /// Cells (i, j) of the Young diagram, 0-based, row by row.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| (0..k as usize).map(move |j| (i, j)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of one degree under a length bound and an optional part bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSet {
    degree: u32,
    max_length: usize,
    max_part: Option<u32>,
    members: Vec<Partition>,
}

impl PartitionSet {
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn max_part(&self) -> Option<u32> {
        self.max_part
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.members.iter()
    }

    pub fn contains(&self, kappa: &Partition) -> bool {
        self.members.contains(kappa)
    }

    pub fn into_vec(self) -> Vec<Partition> {
        self.members
    }
}

impl<'a> IntoIterator for &'a PartitionSet {
    type Item = &'a Partition;
    type IntoIter = std::slice::Iter<'a, Partition>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Partitions of `k` with at most `max_length` parts, in reverse-lexicographic order.
pub fn enumerate_partitions(k: u32, max_length: usize) -> PartitionSet {
    build(k, max_length, None)
}

/// Partitions of `k` with at most `max_length` parts and κ₁ ≤ `max_part`.
pub fn enumerate_bounded(k: u32, max_length: usize, max_part: u32) -> PartitionSet {
    build(k, max_length, Some(max_part))
}

pub fn partition_weight(kappa: &Partition) -> u32 {
    kappa.weight()
}

fn build(k: u32, max_length: usize, max_part: Option<u32>) -> PartitionSet {
    let mut members = Vec::new();
    let mut stack = Vec::with_capacity(max_length);
    let cap = max_part.unwrap_or(k).min(k);
    descend(k, cap, max_length, &mut stack, &mut members);
    PartitionSet {
        degree: k,
        max_length,
        max_part,
        members,
    }
}

fn descend(
    remaining: u32,
    cap: u32,
    slots: usize,
    stack: &mut Vec<u32>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition::from_sorted(stack.clone()));
        return;
    }
    if slots == 0 || (cap as u64) * (slots as u64) < remaining as u64 {
        return;
    }
    for part in (1..=cap.min(remaining)).rev() {
        stack.push(part);
        descend(remaining - part, part, slots - 1, stack, out);
        stack.pop();
    }
}
