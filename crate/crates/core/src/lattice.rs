//! Index arithmetic for the `2N × 2N` lattice `1-N ≤ i, j ≤ N` and for the
//! reduced triangle `1 ≤ j < i ≤ N` that generates it by symmetry.
//!
//! In the reduced system the diagonal `θ(i,i)` is pinned to zero and the row
//! below the triangle mirrors the first row, `θ(i,0) = π/2 − θ(i,1)`. Every
//! reduced cell therefore sees exactly four neighbour slots, some of which are
//! boundary contacts rather than unknowns.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub i: i64,
    pub j: i64,
}

impl LatticeIndex {
    pub const fn new(i: i64, j: i64) -> Self {
        LatticeIndex { i, j }
    }

    /// The four nearest neighbours, in the order `(i-1,j)`, `(i,j+1)`,
    /// `(i,j-1)`, `(i+1,j)`.
    pub fn neighbors(self) -> [LatticeIndex; 4] {
        let LatticeIndex { i, j } = self;
        [
            LatticeIndex::new(i - 1, j),
            LatticeIndex::new(i, j + 1),
            LatticeIndex::new(i, j - 1),
            LatticeIndex::new(i + 1, j),
        ]
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl From<(i64, i64)> for LatticeIndex {
    fn from((i, j): (i64, i64)) -> Self {
        LatticeIndex::new(i, j)
    }
}

/// Number of lattice steps between two cells.
pub fn lattice_distance(a: LatticeIndex, b: LatticeIndex) -> u64 {
    a.i.abs_diff(b.i) + a.j.abs_diff(b.j)
}

/// Classification of one neighbour slot of a reduced cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum NeighborRef {
    /// Another unknown of the reduced system.
    Interior(LatticeIndex),
    /// A diagonal cell, contributing the constant phase 0.
    DiagonalZero(LatticeIndex),
    /// The cell `(i,0)`, contributing `π/2 − θ(i,1)`; carries the source `(i,1)`.
    MirroredRow(LatticeIndex),
    /// Beyond the right edge of the lattice; contributes nothing.
    Absent,
}

/// Row-major layout of the reduced triangle `1 ≤ j < i ≤ N`.
///
/// The position of `(i,j)` is `(i-1)(i-2)/2 + (j-1)`, so rows of constant `i`
/// are contiguous and ordered by `j`. This order is also the on-disk order of
/// every reduced vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedLayout {
    n: usize,
}

impl ReducedLayout {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("lattice half-width N must be ≥ 2, got {n}")));
        }
        Ok(ReducedLayout { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, idx: LatticeIndex) -> bool {
        idx.j >= 1 && idx.j < idx.i && idx.i <= self.n as i64
    }

    pub fn position(&self, idx: LatticeIndex) -> Option<usize> {
        self.contains(idx).then(|| {
            let (i, j) = (idx.i as usize, idx.j as usize);
            (i - 1) * (i - 2) / 2 + (j - 1)
        })
    }

    pub fn indices(&self) -> impl Iterator<Item = LatticeIndex> + '_ {
        (2..=self.n as i64).flat_map(|i| (1..i).map(move |j| LatticeIndex::new(i, j)))
    }

    /// Neighbour slots of a reduced cell, in [`LatticeIndex::neighbors`] order.
    pub fn neighbors(&self, idx: LatticeIndex) -> Result<[NeighborRef; 4]> {
        if !self.contains(idx) {
            return Err(Error::domain(format!(
                "{idx} is outside the reduced system of N = {}",
                self.n
            )));
        }
        let LatticeIndex { i, j } = idx;
        let left = if j == i - 1 {
            NeighborRef::DiagonalZero(LatticeIndex::new(i - 1, i - 1))
        } else {
            NeighborRef::Interior(LatticeIndex::new(i - 1, j))
        };
        let above = if j + 1 == i {
            NeighborRef::DiagonalZero(LatticeIndex::new(i, i))
        } else {
            NeighborRef::Interior(LatticeIndex::new(i, j + 1))
        };
        let below = if j == 1 {
            NeighborRef::MirroredRow(LatticeIndex::new(i, 1))
        } else {
            NeighborRef::Interior(LatticeIndex::new(i, j - 1))
        };
        let right = if i == self.n as i64 {
            NeighborRef::Absent
        } else {
            NeighborRef::Interior(LatticeIndex::new(i + 1, j))
        };
        Ok([left, above, below, right])
    }
}

/// The reduced index set in row-major order.
pub fn reduced_indices(n: usize) -> Result<Vec<LatticeIndex>> {
    Ok(ReducedLayout::new(n)?.indices().collect())
}

pub fn neighbors_reduced(idx: LatticeIndex, n: usize) -> Result<[NeighborRef; 4]> {
    ReducedLayout::new(n)?.neighbors(idx)
}

/// Row-major layout of the full square `1-N ≤ i, j ≤ N`, rows of constant `j`
/// from `j = 1-N` upwards, `i` increasing within a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullLayout {
    n: usize,
}

impl FullLayout {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("lattice half-width N must be ≥ 1"));
        }
        Ok(FullLayout { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> i64 {
        1 - self.n as i64
    }

    pub fn max(&self) -> i64 {
        self.n as i64
    }

    pub fn contains(&self, idx: LatticeIndex) -> bool {
        (self.min()..=self.max()).contains(&idx.i) && (self.min()..=self.max()).contains(&idx.j)
    }

    pub fn position(&self, idx: LatticeIndex) -> Option<usize> {
        self.contains(idx).then(|| {
            let col = (idx.i - self.min()) as usize;
            let row = (idx.j - self.min()) as usize;
            row * self.side() + col
        })
    }

    pub fn index_at(&self, pos: usize) -> LatticeIndex {
        let side = self.side();
        LatticeIndex::new(self.min() + (pos % side) as i64, self.min() + (pos / side) as i64)
    }

    pub fn indices(&self) -> impl Iterator<Item = LatticeIndex> + '_ {
        (0..self.len()).map(|p| self.index_at(p))
    }

    /// Positions of the neighbours that exist inside the square.
    pub fn neighbor_positions(&self, idx: LatticeIndex) -> impl Iterator<Item = usize> + '_ {
        idx.neighbors().into_iter().filter_map(|nb| self.position(nb))
    }
}
