//! Equilibria across a range of lattice sizes and the monotonicity checks
//! relating them.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::coupling::CouplingFunction;
use crate::error::{Error, Result};
use crate::lattice::LatticeIndex;
use crate::solver::{solve_equilibrium, ReducedState, SolveReport, SolverOptions};

/// Slack for comparisons inside one equilibrium.
pub const STATE_SLACK: f64 = 1e-12;
/// Slack for comparisons between consecutive sizes.
pub const SIZE_SLACK: f64 = 1e-10;

/// One converged equilibrium per `N` in `Nmin..=Nmax`.
#[derive(Debug, Clone)]
pub struct EquilibriumFamily {
    members: BTreeMap<usize, SolveReport>,
    tolerance: f64,
}

impl EquilibriumFamily {
    /// Wraps already solved members.
    pub fn from_reports(reports: impl IntoIterator<Item = SolveReport>, tolerance: f64) -> Self {
        EquilibriumFamily {
            members: reports.into_iter().map(|r| (r.n, r)).collect(),
            tolerance,
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.keys().copied()
    }

    pub fn get(&self, n: usize) -> Option<&ReducedState> {
        self.members.get(&n).map(|r| &r.state)
    }

    pub fn report(&self, n: usize) -> Option<&SolveReport> {
        self.members.get(&n)
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, &ReducedState)> + '_ {
        self.members.iter().map(|(&n, r)| (n, &r.state))
    }

    pub fn reports(&self) -> impl Iterator<Item = &SolveReport> + '_ {
        self.members.values()
    }
}

/// Solves every size in `nmin..=nmax`, spreading the solves over `workers`
/// threads (largest sizes first).
pub fn solve_family(
    nmin: usize,
    nmax: usize,
    h: &CouplingFunction,
    opts: &SolverOptions,
    workers: usize,
) -> Result<EquilibriumFamily> {
    if nmin < 2 || nmin > nmax {
        return Err(Error::domain(format!(
            "family range must satisfy 2 ≤ Nmin ≤ Nmax, got {nmin}..{nmax}"
        )));
    }
    let sizes: Vec<usize> = (nmin..=nmax).rev().collect();
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(sizes.len()));
    let workers = workers.clamp(1, sizes.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&n) = sizes.get(k) else { break };
                let r = solve_equilibrium(n, h, opts).map_err(|e| Error::at_size(n, e));
                results.lock().unwrap().push((n, r));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(n, _)| *n);
    let mut reports = Vec::with_capacity(results.len());
    for (_, r) in results {
        reports.push(r?);
    }
    let tolerance = opts
        .newton_tolerance
        .unwrap_or(opts.tolerance)
        .max(reports.iter().map(|r| r.residual_inf_norm).fold(0.0, f64::max));
    Ok(EquilibriumFamily::from_reports(reports, tolerance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `θ(i+1, j) ≥ θ(i, j)`.
    Row,
    /// `θ(i, j) ≥ θ(i, j+1)`.
    Column,
    /// `θ⁽ᴺ⁾(i, j) ≤ θ⁽ᴺ⁺¹⁾(i, j)`.
    Size,
}

/// A pair of values that breaks a monotonicity check: `larger` was expected
/// to be at least `smaller`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: Check,
    /// Lattice size of the state (the smaller size for [`Check::Size`]).
    pub n: usize,
    pub idx: LatticeIndex,
    pub other: LatticeIndex,
    pub smaller: f64,
    pub larger: f64,
}

impl Violation {
    pub fn gap(&self) -> f64 {
        self.smaller - self.larger
    }
}

/// Pairs `(i+1, j)` against `(i, j)` for `1 ≤ j ≤ i ≤ N-1`, with the
/// diagonal standing in as zero.
pub fn check_row_monotone(state: &ReducedState) -> Vec<Violation> {
    let n = state.n() as i64;
    let mut out = Vec::new();
    for i in 1..n {
        for j in 1..=i {
            let lo = LatticeIndex::new(i, j);
            let hi = LatticeIndex::new(i + 1, j);
            let smaller = state.boundary_aware(lo).expect("inside triangle");
            let larger = state.get(hi).expect("inside triangle");
            if larger < smaller - STATE_SLACK {
                out.push(Violation {
                    check: Check::Row,
                    n: state.n(),
                    idx: hi,
                    other: lo,
                    smaller,
                    larger,
                });
            }
        }
    }
    out
}

/// Pairs `(i, j)` against `(i, j+1)` for `1 ≤ j < i ≤ N`, with the diagonal
/// standing in as zero.
pub fn check_column_monotone(state: &ReducedState) -> Vec<Violation> {
    let mut out = Vec::new();
    for (hi, larger) in state.iter() {
        let lo = LatticeIndex::new(hi.i, hi.j + 1);
        let smaller = state.boundary_aware(lo).expect("inside triangle or diagonal");
        if larger < smaller - STATE_SLACK {
            out.push(Violation {
                check: Check::Column,
                n: state.n(),
                idx: hi,
                other: lo,
                smaller,
                larger,
            });
        }
    }
    out
}

/// Compares consecutive members cell by cell, padding the smaller lattice
/// with zeros beyond its last row.
pub fn check_n_monotone(family: &EquilibriumFamily) -> Vec<Violation> {
    let mut out = Vec::new();
    let members: Vec<_> = family.states().collect();
    for pair in members.windows(2) {
        let (n, small) = pair[0];
        let (_, big) = pair[1];
        for (idx, larger) in big.iter() {
            let smaller = small.padded(idx).expect("inside triangle");
            if larger < smaller - SIZE_SLACK {
                out.push(Violation {
                    check: Check::Size,
                    n,
                    idx,
                    other: idx,
                    smaller,
                    larger,
                });
            }
        }
    }
    out
}

/// Row and column violations of every member.
pub fn check_members(family: &EquilibriumFamily) -> Vec<Violation> {
    family
        .states()
        .flat_map(|(_, s)| check_row_monotone(s).into_iter().chain(check_column_monotone(s)))
        .collect()
}

/// Sequence of values at one index across the family.
#[derive(Debug, Clone, Serialize)]
pub struct Extrapolation {
    pub idx: LatticeIndex,
    /// `(N, θ⁽ᴺ⁾(idx))`, zero-padded where `idx` lies beyond row `N`.
    pub values: Vec<(usize, f64)>,
    /// Value at the largest size.
    pub estimate: f64,
    /// `(N, θ⁽ᴺ⁺¹⁾ − θ⁽ᴺ⁾)` for consecutive members.
    pub increments: Vec<(usize, f64)>,
    /// Least-squares `ρ` in `δ_N ≈ c·ρᴺ` over the positive increments.
    /// Diagnostic only.
    pub decay_ratio: Option<f64>,
}

impl Extrapolation {
    pub fn within_bound(&self) -> bool {
        self.estimate > 0.0 && self.estimate <= FRAC_PI_4 + STATE_SLACK
    }
}

pub fn extrapolate(family: &EquilibriumFamily, idx: LatticeIndex) -> Result<Extrapolation> {
    if idx.j < 1 || idx.j >= idx.i {
        return Err(Error::domain(format!("{idx} is not a reduced index")));
    }
    let values: Vec<(usize, f64)> = family
        .states()
        .map(|(n, s)| (n, s.padded(idx).expect("checked above")))
        .collect();
    let Some(&(_, estimate)) = values.last() else {
        return Err(Error::domain("empty family"));
    };
    let increments: Vec<(usize, f64)> = values
        .windows(2)
        .filter(|w| w[1].0 == w[0].0 + 1)
        .map(|w| (w[0].0, w[1].1 - w[0].1))
        .collect();
    Ok(Extrapolation {
        idx,
        values,
        estimate,
        decay_ratio: geometric_ratio(&increments),
        increments,
    })
}

fn geometric_ratio(increments: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = increments
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(n, d)| (n as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some((sxy / sxx).exp())
}
