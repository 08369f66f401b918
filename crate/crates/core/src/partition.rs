//! Hard partitions of the microstates, stored as restricted growth strings.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::SscError;
use crate::Result;

/// Largest state count accepted by [`enumerate_partitions`].
pub const ENUMERATION_LIMIT: usize = 12;

/// Assignment of each microstate to a block, canonically labeled: block labels
/// appear in order of first occurrence, so `assignment[0] == 0` and every label
/// in `0..num_blocks` is used.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    assignment: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// Relabels an arbitrary assignment into canonical form.
    pub fn from_assignment(raw: Vec<usize>) -> Self {
        let mut relabel: Vec<(usize, usize)> = Vec::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for label in raw {
            let canon = match relabel.iter().find(|(from, _)| *from == label) {
                Some(&(_, to)) => to,
                None => {
                    let to = relabel.len();
                    relabel.push((label, to));
                    to
                }
            };
            assignment.push(canon);
        }
        Partition {
            assignment,
            blocks: relabel.len(),
        }
    }

    /// Every state in its own block.
    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            blocks: n,
        }
    }

    /// All states in one block.
    pub fn single_block(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.assignment[x]
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// Number of microstates.
    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Members of each block, in ascending state order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.assignment.iter().enumerate() {
            out[b].push(x);
        }
        out
    }
}

/// Iterator over set partitions of `{0..n−1}` with at most `k_max` blocks, in
/// lexicographic order of their restricted growth strings.
#[derive(Clone, Debug)]
pub struct PartitionIter {
    rgs: Vec<usize>,
    /// `prefix_max[i] = max(rgs[0..=i])`.
    prefix_max: Vec<usize>,
    k_max: usize,
    done: bool,
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let current = Partition {
            assignment: self.rgs.clone(),
            blocks: self.prefix_max.last().map_or(0, |m| m + 1),
        };
        self.advance();
        Some(current)
    }
}

impl PartitionIter {
    fn advance(&mut self) {
        let n = self.rgs.len();
        // rightmost position that can still grow
        let pos = (1..n).rev().find(|&i| {
            let bound = self.prefix_max[i - 1] + 1;
            self.rgs[i] < bound && self.rgs[i] + 1 < self.k_max
        });
        let Some(i) = pos else {
            self.done = true;
            return;
        };
        self.rgs[i] += 1;
        self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
        for j in i + 1..n {
            self.rgs[j] = 0;
            self.prefix_max[j] = self.prefix_max[i];
        }
    }
}

/// All partitions of `n` states into at most `k_max` blocks.
///
/// Refuses `n > 12` (Bell(13) is already 27 644 437).
pub fn enumerate_partitions(n: usize, k_max: usize) -> Result<PartitionIter> {
    if n > ENUMERATION_LIMIT {
        return Err(SscError::SizeGuard {
            states: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n == 0 || k_max == 0 {
        return Err(SscError::Argument("need n >= 1 and k_max >= 1".into()));
    }
    Ok(PartitionIter {
        rgs: vec![0; n],
        prefix_max: vec![0; n],
        k_max,
        done: false,
    })
}
