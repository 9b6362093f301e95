//! Extension of a reduced equilibrium to the full `2N × 2N` lattice.
//!
//! The lattice splits into eight triangular regions around the centre point
//! `(½, ½)`. Two generators reproduce the whole symmetry table:
//!
//! * reflection across the row boundary, `(i, j) ↦ (i, 1 − j)`, with
//!   `θ ↦ π/2 − θ`, which turns region I into region II;
//! * the quarter turn `(i, j) ↦ (j, 1 − i)` about the centre, with
//!   `θ ↦ θ + π/2`, which carries regions I/II to III/IV, V/VI and VII/VIII.
//!
//! Every cell is reduced to the wedge `{ i ≥ 1, 1 − i < j ≤ i }` (region I,
//! region II and the zero diagonal between I and VIII) by inverse quarter
//! turns. Phases are stored as a quarter-turn count plus a small offset so
//! that the centre-cell differences of exactly `±π/2` stay exact.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::coupling::CouplingFunction;
use crate::error::{Error, Result};
use crate::lattice::{FullLayout, LatticeIndex};
use crate::solver::ReducedState;

/// Reduces an angle to `(-π, π]`; angles already in range are returned
/// unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        x
    } else {
        x - TAU * ((x - PI) / TAU).ceil()
    }
}

/// A phase `q·π/2 + offset` with `q ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    quarter: u8,
    offset: f64,
}

impl Phase {
    pub const ZERO: Phase = Phase {
        quarter: 0,
        offset: 0.0,
    };

    pub fn new(quarter: i64, offset: f64) -> Self {
        Phase {
            quarter: quarter.rem_euclid(4) as u8,
            offset,
        }
    }

    /// Splits an angle into its nearest quarter turn and a remainder in
    /// `[-π/4, π/4]`.
    pub fn from_radians(x: f64) -> Self {
        let q = (x / FRAC_PI_2).round();
        Phase::new(q as i64, x - q * FRAC_PI_2)
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    pub fn offset(self) -> f64 {
        self.offset
    }

    /// The representative `q·π/2 + offset`.
    pub fn radians(self) -> f64 {
        self.quarter as f64 * FRAC_PI_2 + self.offset
    }

    pub fn rotated(self, quarters: i64) -> Self {
        Phase::new(self.quarter as i64 + quarters, self.offset)
    }

    /// `self − other` reduced to `(-π, π]`.
    pub fn difference(self, other: Phase) -> f64 {
        let dq = (self.quarter as i64 - other.quarter as i64).rem_euclid(4);
        let signed = if dq == 3 { -1.0 } else { dq as f64 };
        wrap_angle(signed * FRAC_PI_2 + (self.offset - other.offset))
    }
}

/// The eight symmetry regions plus the four fixed diagonal rays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    /// Diagonal ray fixed at `k·π/2`.
    Ray(u8),
}

fn in_base_wedge(idx: LatticeIndex) -> bool {
    idx.i >= 1 && idx.j <= idx.i && idx.j > 1 - idx.i
}

/// Quarter-turn count `k` and base-wedge cell `w` with `idx = rotᵏ(w)`.
fn canonical(idx: LatticeIndex) -> (u8, LatticeIndex) {
    let mut w = idx;
    for k in 0..4 {
        if in_base_wedge(w) {
            return (k, w);
        }
        w = LatticeIndex::new(1 - w.j, w.i);
    }
    unreachable!("the four rotated wedges cover the lattice")
}

/// Region label of a lattice cell.
pub fn region_of(idx: LatticeIndex) -> Region {
    const LABELS: [[Region; 2]; 4] = [
        [Region::I, Region::VIII],
        [Region::III, Region::II],
        [Region::V, Region::IV],
        [Region::VII, Region::VI],
    ];
    let (k, w) = canonical(idx);
    if w.i == w.j {
        Region::Ray(k)
    } else if w.j >= 1 {
        LABELS[k as usize][0]
    } else {
        // The base wedge's region II rotated by k lands in the region that
        // precedes the k-th ray's successor: II, IV, VI, VIII.
        LABELS[((k + 1) % 4) as usize][1]
    }
}

/// Phase field over `1-N ≤ i, j ≤ N`, stored modulo 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    layout: FullLayout,
    cells: Vec<Phase>,
}

impl FullState {
    pub fn zeros(n: usize) -> Result<Self> {
        let layout = FullLayout::new(n)?;
        Ok(FullState {
            layout,
            cells: vec![Phase::ZERO; layout.len()],
        })
    }

    /// Builds a field from raw angles, in [`FullLayout`] order.
    pub fn from_radians(n: usize, values: &[f64]) -> Result<Self> {
        let layout = FullLayout::new(n)?;
        if values.len() != layout.len() {
            return Err(Error::domain(format!(
                "full lattice of N = {n} has {} cells, got {}",
                layout.len(),
                values.len()
            )));
        }
        Ok(FullState {
            layout,
            cells: values.iter().map(|&v| Phase::from_radians(v)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn layout(&self) -> &FullLayout {
        &self.layout
    }

    pub fn phases(&self) -> &[Phase] {
        &self.cells
    }

    pub fn get(&self, idx: LatticeIndex) -> Option<Phase> {
        self.layout.position(idx).map(|p| self.cells[p])
    }

    /// Representative angles in layout order, each in `[-π/4, 7π/4]`.
    pub fn radians(&self) -> Vec<f64> {
        self.cells.iter().map(|p| p.radians()).collect()
    }

    /// Rows of constant `j`, from `j = 1-N` upwards.
    pub fn rows(&self) -> impl Iterator<Item = (i64, Vec<f64>)> + '_ {
        let side = self.layout.side();
        self.cells
            .chunks(side)
            .enumerate()
            .map(move |(r, row)| (self.layout.min() + r as i64, row.iter().map(|p| p.radians()).collect()))
    }
}

/// Applies the eight-region symmetry table to a reduced state.
pub fn extend_full(reduced: &ReducedState) -> FullState {
    let layout = FullLayout::new(reduced.n()).expect("reduced N ≥ 2");
    let cells = layout
        .indices()
        .map(|idx| {
            let (k, w) = canonical(idx);
            let base = if w.i == w.j {
                Phase::ZERO
            } else if w.j >= 1 {
                Phase::new(0, reduced.get(w).expect("region I cell"))
            } else {
                let src = LatticeIndex::new(w.i, 1 - w.j);
                Phase::new(1, -reduced.get(src).expect("mirror of region II cell"))
            };
            base.rotated(k as i64)
        })
        .collect();
    FullState { layout, cells }
}

/// Right-hand side of the untruncated finite system at every cell: a sum of
/// `H` over the neighbours that exist (two at corners, three on edges).
pub fn full_residual(full: &FullState, h: &CouplingFunction) -> Vec<f64> {
    let layout = full.layout;
    layout
        .indices()
        .zip(&full.cells)
        .map(|(idx, &own)| {
            layout
                .neighbor_positions(idx)
                .map(|q| h.value(full.cells[q].difference(own)))
                .sum()
        })
        .collect()
}

/// Phases read around the `k`-th concentric square ring about the centre
/// four cells (ring 0 is the centre ring itself).
#[derive(Debug, Clone, Serialize)]
pub struct RingProfile {
    pub k: usize,
    pub cells: Vec<LatticeIndex>,
    /// Unwrapped phases, starting at the cell on the I/VIII ray.
    pub phases: Vec<f64>,
    /// Sum of the wrapped differences once around the closed ring.
    pub total_increase: f64,
    pub winding: i64,
}

impl RingProfile {
    /// True when no step around the ring decreases by more than `slack`.
    pub fn is_non_decreasing(&self, slack: f64) -> bool {
        self.steps().all(|d| d >= -slack)
    }

    /// Wrapped phase increments around the closed ring.
    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.phases.len();
        (0..m).map(move |a| {
            if a + 1 < m {
                self.phases[a + 1] - self.phases[a]
            } else {
                self.phases[0] + self.total_increase - self.phases[m - 1]
            }
        })
    }
}

fn ring_cells(k: i64) -> Vec<LatticeIndex> {
    let c = LatticeIndex::new;
    let top = k + 1;
    let mut cells = vec![c(top, top)];
    cells.extend((-k..=k).rev().map(|j| c(top, j)));
    cells.extend((-k..=k).rev().map(|i| c(i, -k)));
    cells.extend((-k + 1..=top).map(|j| c(-k, j)));
    cells.extend((-k + 1..=k).map(|i| c(i, top)));
    cells
}

/// Reads ring `k` in region order I → II → … → VIII, the direction in which
/// a rotating wave's phase increases.
pub fn ring_profile(full: &FullState, k: usize) -> Result<RingProfile> {
    if k + 1 > full.n() {
        return Err(Error::domain(format!(
            "ring {k} does not fit in the lattice of N = {}",
            full.n()
        )));
    }
    let cells = ring_cells(k as i64);
    let phases_raw: Vec<Phase> = cells
        .iter()
        .map(|&c| full.get(c).expect("ring inside lattice"))
        .collect();
    let mut phases = Vec::with_capacity(cells.len());
    let mut acc = wrap_angle(phases_raw[0].radians());
    phases.push(acc);
    for w in phases_raw.windows(2) {
        acc += w[1].difference(w[0]);
        phases.push(acc);
    }
    let closing = phases_raw[0].difference(*phases_raw.last().unwrap());
    let total_increase = acc + closing - phases[0];
    Ok(RingProfile {
        k,
        cells,
        phases,
        total_increase,
        winding: (total_increase / TAU).round() as i64,
    })
}
