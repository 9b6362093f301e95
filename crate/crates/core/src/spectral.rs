//! Linearization about a rotating wave with one cell pinned.
//!
//! Subtracting the phase of a pinned cell `p` and deleting `p` from the lattice
//! turns the translation-invariant linearization into `L = P + A` on the
//! remaining cells, where
//!
//! * `A` is the weighted graph Laplacian `(Ax)_c = Σ w(c,d)(x_d − x_c)` over
//!   nearest-neighbour edges, with `w(c,d) = H′(φ_d − φ_c)`;
//! * `P` is diagonal, `−H′(−φ_c)` at the neighbours of `p` and zero elsewhere.
//!
//! Operators act on a square window `[p ± R]` with a free boundary: edges
//! leaving the window are dropped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coupling::CouplingFunction;
use crate::error::{Error, Result};
use crate::extension::FullState;
use crate::lattice::{lattice_distance, LatticeIndex};
use crate::sparse::{BandedCholesky, SparseMatrix};

pub const DEFAULT_PINNED: LatticeIndex = LatticeIndex::new(1, 1);
pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-8;
pub const MAX_EIGEN_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearizationOperator {
    /// Deleted cell; `None` for a plain window Laplacian.
    pinned: Option<LatticeIndex>,
    centre: LatticeIndex,
    radius: usize,
    cells: Vec<LatticeIndex>,
    /// `φ_c`, the wrapped phase of each cell relative to the centre.
    phi: Vec<f64>,
    edges: Vec<Edge>,
    /// `(cell, P_c)` at the pinned cell's neighbours.
    potential: Vec<(usize, f64)>,
    #[serde(skip)]
    matrix: SparseMatrix,
}

/// `L = P + A` on the window `[pinned ± radius]` minus the pinned cell.
pub fn build_linearization(
    full: &FullState,
    pinned: LatticeIndex,
    radius: usize,
    h: &CouplingFunction,
) -> Result<LinearizationOperator> {
    LinearizationOperator::assemble(full, pinned, radius, true, h)
}

/// The graph Laplacian `A` on the whole window `[centre ± radius]`, with no
/// cell removed and no potential.
pub fn build_window_laplacian(
    full: &FullState,
    centre: LatticeIndex,
    radius: usize,
    h: &CouplingFunction,
) -> Result<LinearizationOperator> {
    LinearizationOperator::assemble(full, centre, radius, false, h)
}

impl LinearizationOperator {
    fn assemble(
        full: &FullState,
        centre: LatticeIndex,
        radius: usize,
        pin: bool,
        h: &CouplingFunction,
    ) -> Result<Self> {
        if radius < 2 {
            return Err(Error::domain(format!("truncation radius must be ≥ 2, got {radius}")));
        }
        let r = radius as i64;
        let layout = full.layout();
        for corner in [
            LatticeIndex::new(centre.i - r, centre.j - r),
            LatticeIndex::new(centre.i + r, centre.j + r),
        ] {
            if !layout.contains(corner) {
                return Err(Error::domain(format!(
                    "window {centre} ± {radius} leaves the lattice of N = {}",
                    full.n()
                )));
            }
        }
        let mut op = LinearizationOperator {
            pinned: pin.then_some(centre),
            centre,
            radius,
            cells: Vec::new(),
            phi: Vec::new(),
            edges: Vec::new(),
            potential: Vec::new(),
            matrix: SparseMatrix::from_triplets(0, []),
        };
        let base = full.get(centre).expect("centre inside lattice");
        for j in centre.j - r..=centre.j + r {
            for i in centre.i - r..=centre.i + r {
                let c = LatticeIndex::new(i, j);
                if pin && c == centre {
                    continue;
                }
                op.cells.push(c);
                op.phi
                    .push(full.get(c).expect("window inside lattice").difference(base));
            }
        }
        let phase = |c: LatticeIndex| full.get(c).expect("window inside lattice");
        for (a, &c) in op.cells.iter().enumerate() {
            // Right and upper neighbours give each edge exactly once.
            for d in [LatticeIndex::new(c.i + 1, c.j), LatticeIndex::new(c.i, c.j + 1)] {
                if let Some(b) = op.position(d) {
                    let weight = h.derivative(phase(d).difference(phase(c)));
                    op.edges.push(Edge { a, b, weight });
                }
            }
            if pin && lattice_distance(c, centre) == 1 {
                op.potential.push((a, -h.derivative(base.difference(phase(c)))));
            }
        }
        let dim = op.cells.len();
        let mut triplets = Vec::with_capacity(dim + 4 * op.edges.len());
        for e in &op.edges {
            triplets.push((e.a, e.b, e.weight));
            triplets.push((e.b, e.a, e.weight));
            triplets.push((e.a, e.a, -e.weight));
            triplets.push((e.b, e.b, -e.weight));
        }
        triplets.extend(op.potential.iter().map(|&(c, p)| (c, c, p)));
        op.matrix = SparseMatrix::from_triplets(dim, triplets);
        Ok(op)
    }

    /// Position of a window cell in the operator's ordering.
    pub fn position(&self, idx: LatticeIndex) -> Option<usize> {
        let r = self.radius as i64;
        let (di, dj) = (idx.i - self.centre.i, idx.j - self.centre.j);
        if di.abs() > r || dj.abs() > r {
            return None;
        }
        let side = 2 * r + 1;
        let raw = ((dj + r) * side + di + r) as usize;
        match self.pinned {
            None => Some(raw),
            Some(_) if di == 0 && dj == 0 => None,
            Some(_) => {
                let p = (r * side + r) as usize;
                Some(if raw > p { raw - 1 } else { raw })
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn pinned(&self) -> Option<LatticeIndex> {
        self.pinned
    }

    pub fn centre(&self) -> LatticeIndex {
        self.centre
    }

    pub fn truncation_radius(&self) -> usize {
        self.radius
    }

    pub fn cells(&self) -> &[LatticeIndex] {
        &self.cells
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn potential(&self) -> &[(usize, f64)] {
        &self.potential
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// Largest `|φ_d − φ_c|` over the window's edges.
    pub fn max_edge_difference(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| crate::extension::wrap_angle(self.phi[e.b] - self.phi[e.a]).abs())
            .fold(0.0, f64::max)
    }

    /// `Lx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok(self.matrix.mul_vec(x))
    }

    /// `⟨−Lx, x⟩` as `Σ −P_c x_c² + Σ_edges w (x_a − x_b)²`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let pot: f64 = self.potential.iter().map(|&(c, p)| -p * x[c] * x[c]).sum();
        let lap: f64 = self.edges.iter().map(|e| e.weight * (x[e.a] - x[e.b]).powi(2)).sum();
        Ok(pot + lap)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::domain(format!(
                "vector of length {} for operator of dimension {}",
                x.len(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Smallest eigenvalue of `−L`.
    pub mu0_estimate: f64,
    /// Largest eigenvalue of `L`, `−μ₀`.
    pub top_of_spectrum: f64,
    /// `‖−Lv − μ₀v‖₂` for the returned unit eigenvector.
    pub residual: f64,
    pub iterations: usize,
    pub truncation_radius: usize,
    pub dimension: usize,
    pub shift: f64,
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

/// Smallest eigenvalue of `−L` by inverse iteration on `−L + δI`, with `δ` a
/// small multiple of the Gershgorin bound so that the factorization stays
/// definite when `−L` is singular.
pub fn smallest_eigen_of_neg_l(op: &LinearizationOperator, tol: f64, seed: u64) -> Result<SpectralReport> {
    if !(tol > 0.0) {
        return Err(Error::domain("eigen tolerance must be positive"));
    }
    let neg = op.matrix.scaled_shifted(-1.0, 0.0);
    let shift = 1e-6 * neg.max_abs_row_sum().max(1.0);
    let factor = BandedCholesky::factor(&neg.scaled_shifted(1.0, shift))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..op.dimension()).map(|_| rng.gen_range(0.5..1.5)).collect();
    normalize(&mut v);
    let mut best = (f64::NAN, f64::INFINITY);
    let mut stagnant = 0;
    for it in 1..=MAX_EIGEN_ITERATIONS {
        v = factor.solve(&v);
        normalize(&mut v);
        let nv = neg.mul_vec(&v);
        let mu: f64 = nv.iter().zip(&v).map(|(a, b)| a * b).sum();
        let res = nv.iter().zip(&v).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
        if res <= tol {
            return Ok(SpectralReport {
                mu0_estimate: mu,
                top_of_spectrum: -mu,
                residual: res,
                iterations: it,
                truncation_radius: op.radius,
                dimension: op.dimension(),
                shift,
                eigenvector: v,
            });
        }
        if res < 0.999 * best.1 {
            best = (mu, res);
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant >= 50 {
                return Err(Error::Spectral {
                    estimate: best.0,
                    residual: best.1,
                    iterations: it,
                });
            }
        }
    }
    Err(Error::Spectral {
        estimate: best.0,
        residual: best.1,
        iterations: MAX_EIGEN_ITERATIONS,
    })
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Ramp of height one around the pinned cell: `k/n` at lattice distance
/// `k ≤ n`, `1` beyond.
pub fn linf_witness(op: &LinearizationOperator, n: usize) -> Result<Vec<f64>> {
    let Some(p) = op.pinned else {
        return Err(Error::domain("witness needs a pinned operator"));
    };
    if n == 0 {
        return Err(Error::domain("witness ramp length must be ≥ 1"));
    }
    if op.radius < n + 1 {
        return Err(Error::domain(format!(
            "radius {} too small for a ramp of length {n}",
            op.radius
        )));
    }
    Ok(op
        .cells
        .iter()
        .map(|&c| {
            let k = lattice_distance(c, p) as usize;
            if k <= n {
                k as f64 / n as f64
            } else {
                1.0
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct LinfDecayRow {
    pub n: usize,
    pub witness_sup: f64,
    pub image_sup: f64,
    pub bound: f64,
}

impl LinfDecayRow {
    pub fn within_bound(&self) -> bool {
        self.image_sup <= self.bound + 1e-12
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LinfDecayTable {
    pub pinned: LatticeIndex,
    pub truncation_radius: usize,
    pub max_derivative: f64,
    pub rows: Vec<LinfDecayRow>,
}

impl LinfDecayTable {
    pub fn all_within_bound(&self) -> bool {
        self.rows.iter().all(LinfDecayRow::within_bound)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].image_sup < w[0].image_sup)
    }

    /// `‖Lx⁽²ⁿ⁾‖∞ / ‖Lx⁽ⁿ⁾‖∞` when both rows are present.
    pub fn doubling_ratio(&self, n: usize) -> Option<f64> {
        let sup = |m: usize| self.rows.iter().find(|r| r.n == m).map(|r| r.image_sup);
        Some(sup(2 * n)? / sup(n)?)
    }
}

/// Minimum lattice half-width that holds the decay check's window around
/// `pinned`.
pub fn linf_required_size(pinned: LatticeIndex, n_max: usize) -> usize {
    let r = n_max as i64 + 2;
    let need = [pinned.i + r, pinned.j + r, 1 - (pinned.i - r), 1 - (pinned.j - r)];
    need.into_iter().max().unwrap().max(2) as usize
}

/// `‖Lx⁽ⁿ⁾‖∞` for `n = 1..=n_max` on the window of radius `n_max + 2`,
/// against the bound `4·max H′ / n`.
pub fn linf_decay_check(
    full: &FullState,
    pinned: LatticeIndex,
    n_max: usize,
    h: &CouplingFunction,
) -> Result<LinfDecayTable> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be ≥ 1"));
    }
    let op = build_linearization(full, pinned, n_max + 2, h)?;
    let max_derivative = h.max_derivative_on_core();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rows = (1..=n_max)
        .map(|n| {
            let x = linf_witness(&op, n)?;
            let lx = op.apply(&x)?;
            Ok(LinfDecayRow {
                n,
                witness_sup: sup(&x),
                image_sup: sup(&lx),
                bound: 4.0 * max_derivative / n as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinfDecayTable {
        pinned,
        truncation_radius: op.radius,
        max_derivative,
        rows,
    })
}
