//! Equilibria of the reduced phase system.
//!
//! With the frequency rotated away, each reduced cell evolves by
//!
//! ```text
//! dθ(i,j)/dt = Σ H(θ(neighbour) − θ(i,j)),   1 ≤ j < i ≤ N,
//! ```
//!
//! with `θ(i,i) = 0` and `θ(i,0) = π/2 − θ(i,1)`. Started from `θ ≡ π/4` the
//! flow decreases monotonically and stays inside `(0, π/4]`, so integrating it
//! to rest gives the equilibrium. Newton's method then polishes the result.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::coupling::CouplingFunction;
use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, NeighborRef, ReducedLayout};
use crate::sparse::{BandedCholesky, SparseMatrix};

/// Phase-lags over the reduced triangle, in [`ReducedLayout`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    layout: ReducedLayout,
    values: Vec<f64>,
}

impl ReducedState {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let layout = ReducedLayout::new(n)?;
        if values.len() != layout.len() {
            return Err(Error::domain(format!(
                "N = {n} needs {} values, got {}",
                layout.len(),
                values.len()
            )));
        }
        Ok(ReducedState { layout, values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        let layout = ReducedLayout::new(n)?;
        Ok(ReducedState {
            layout,
            values: vec![value; layout.len()],
        })
    }

    /// The relaxation's starting point, every entry `π/4`.
    pub fn initial(n: usize) -> Result<Self> {
        Self::constant(n, FRAC_PI_4)
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn layout(&self) -> &ReducedLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: LatticeIndex) -> Option<f64> {
        self.layout.position(idx).map(|p| self.values[p])
    }

    /// Value at any cell the reduced equations refer to: the triangle itself,
    /// the zero diagonal `1 ≤ i = j ≤ N`, and the mirrored row `j = 0`.
    pub fn boundary_aware(&self, idx: LatticeIndex) -> Option<f64> {
        let n = self.n() as i64;
        if let Some(v) = self.get(idx) {
            Some(v)
        } else if idx.i == idx.j && (1..=n).contains(&idx.i) {
            Some(0.0)
        } else if idx.j == 0 && (1..=n).contains(&idx.i) {
            self.boundary_aware(LatticeIndex::new(idx.i, 1)).map(|v| FRAC_PI_2 - v)
        } else {
            None
        }
    }

    /// Value on the infinite reduced triangle after appending zeros for
    /// `i > N`; `None` outside `1 ≤ j < i`.
    pub fn padded(&self, idx: LatticeIndex) -> Option<f64> {
        if idx.j < 1 || idx.j >= idx.i {
            None
        } else {
            Some(self.get(idx).unwrap_or(0.0))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticeIndex, f64)> + '_ {
        self.layout.indices().zip(self.values.iter().copied())
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relaxation stops once `‖residual‖∞` drops below this.
    pub tolerance: f64,
    pub max_steps: u64,
    pub time_step: f64,
    /// Newton polishing target after relaxation; `None` skips refinement.
    pub newton_tolerance: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_steps: 10_000_000,
            time_step: 0.1,
            newton_tolerance: Some(1e-13),
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::domain("tolerance must be positive"));
        }
        if !(self.time_step > 0.0) || !self.time_step.is_finite() {
            return Err(Error::domain("time step must be positive and finite"));
        }
        if let Some(t) = self.newton_tolerance {
            if !(t > 0.0) {
                return Err(Error::domain("newton tolerance must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub state: ReducedState,
    pub n: usize,
    pub residual_inf_norm: f64,
    pub relaxation_steps: u64,
    pub newton_steps: usize,
    /// Accepted steps in which some entry increased or started with a
    /// positive time derivative.
    pub monotone_violations: u64,
    /// Accepted steps that left `(0, π/4]`.
    pub bound_violations: u64,
    pub min_entry: f64,
    pub max_entry: f64,
    pub final_time_step: f64,
    pub flow_time: f64,
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Interior(usize),
    Zero,
    Mirror,
    Absent,
}

/// Neighbour table of the reduced system with slots resolved to positions.
#[derive(Debug, Clone)]
struct ReducedSystem {
    layout: ReducedLayout,
    slots: Vec<[Slot; 4]>,
    /// Interior edges `(p, q)` with `p < q`.
    edges: Vec<(usize, usize)>,
}

impl ReducedSystem {
    fn new(layout: ReducedLayout) -> Self {
        let mut slots = Vec::with_capacity(layout.len());
        let mut edges = Vec::new();
        for (p, idx) in layout.indices().enumerate() {
            let refs = layout.neighbors(idx).expect("index from layout");
            let resolved = refs.map(|r| match r {
                NeighborRef::Interior(nb) => {
                    let q = layout.position(nb).expect("interior neighbour in layout");
                    if p < q {
                        edges.push((p, q));
                    }
                    Slot::Interior(q)
                }
                NeighborRef::DiagonalZero(_) => Slot::Zero,
                NeighborRef::MirroredRow(_) => Slot::Mirror,
                NeighborRef::Absent => Slot::Absent,
            });
            slots.push(resolved);
        }
        ReducedSystem { layout, slots, edges }
    }

    fn residual_into(&self, h: &CouplingFunction, theta: &[f64], out: &mut [f64]) {
        for (p, slots) in self.slots.iter().enumerate() {
            let t = theta[p];
            out[p] = slots
                .iter()
                .map(|s| match *s {
                    Slot::Interior(q) => h.value(theta[q] - t),
                    Slot::Zero => h.value(-t),
                    Slot::Mirror => h.value(FRAC_PI_2 - 2.0 * t),
                    Slot::Absent => 0.0,
                })
                .sum();
        }
    }

    fn jacobian(&self, h: &CouplingFunction, theta: &[f64]) -> SparseMatrix {
        let mut diag = vec![0.0; theta.len()];
        let mut triplets = Vec::with_capacity(theta.len() + 2 * self.edges.len());
        for &(p, q) in &self.edges {
            let w = h.derivative(theta[q] - theta[p]);
            triplets.push((p, q, w));
            triplets.push((q, p, w));
            diag[p] -= w;
            diag[q] -= w;
        }
        for (p, slots) in self.slots.iter().enumerate() {
            let t = theta[p];
            for s in slots {
                match s {
                    Slot::Zero => diag[p] -= h.derivative(-t),
                    Slot::Mirror => diag[p] -= 2.0 * h.derivative(FRAC_PI_2 - 2.0 * t),
                    Slot::Interior(_) | Slot::Absent => {}
                }
            }
        }
        triplets.extend(diag.into_iter().enumerate().map(|(p, d)| (p, p, d)));
        SparseMatrix::from_triplets(theta.len(), triplets)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Right-hand side of the reduced equations at `state`.
pub fn residual(state: &ReducedState, h: &CouplingFunction) -> Vec<f64> {
    let sys = ReducedSystem::new(*state.layout());
    let mut out = vec![0.0; state.len()];
    sys.residual_into(h, state.values(), &mut out);
    out
}

/// [`residual`] for a raw vector, checking its length against `N`.
pub fn residual_of(n: usize, values: &[f64], h: &CouplingFunction) -> Result<Vec<f64>> {
    let state = ReducedState::new(n, values.to_vec())?;
    Ok(residual(&state, h))
}

pub fn residual_inf_norm(state: &ReducedState, h: &CouplingFunction) -> f64 {
    inf_norm(&residual(state, h))
}

/// Jacobian of [`residual`]. Symmetric by construction: each interior edge
/// weight is evaluated once and written to both triangles.
pub fn jacobian(state: &ReducedState, h: &CouplingFunction) -> SparseMatrix {
    ReducedSystem::new(*state.layout()).jacobian(h, state.values())
}

/// Outcome of one attempted integrator step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// An entry that was not rising increased; the step was discarded and
    /// the step size halved.
    Rejected,
}

/// Classic fixed-step RK4 on the reduced flow. When the start is descending
/// (no positive derivative), a step that would raise an entry whose
/// derivative is not positive counts as overshoot and is retried at half the
/// step size.
#[derive(Debug, Clone)]
pub struct FlowIntegrator {
    sys: ReducedSystem,
    h: CouplingFunction,
    theta: Vec<f64>,
    dt: f64,
    min_dt: f64,
    time: f64,
    steps: u64,
    monotone_violations: u64,
    bound_violations: u64,
    k: [Vec<f64>; 4],
    /// `k[0]` holds the residual of the current `theta`.
    k0_current: bool,
    /// Set when no entry rises at the start; overshoot is then policed.
    descending: bool,
    trial: Vec<f64>,
    scratch: Vec<f64>,
}

impl FlowIntegrator {
    pub fn new(start: ReducedState, h: &CouplingFunction, dt: f64) -> Self {
        let m = start.len();
        let sys = ReducedSystem::new(*start.layout());
        let mut k0 = vec![0.0; m];
        sys.residual_into(h, &start.values, &mut k0);
        let descending = k0.iter().all(|&v| v <= 0.0);
        let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; m]);
        k[0] = k0;
        FlowIntegrator {
            sys,
            h: h.clone(),
            theta: start.values,
            dt,
            min_dt: dt * 1e-6,
            time: 0.0,
            steps: 0,
            monotone_violations: 0,
            bound_violations: 0,
            k,
            k0_current: true,
            descending,
            trial: vec![0.0; m],
            scratch: vec![0.0; m],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn monotone_violations(&self) -> u64 {
        self.monotone_violations
    }

    pub fn bound_violations(&self) -> u64 {
        self.bound_violations
    }

    /// `‖residual‖∞` at the current state; also leaves it in the first stage
    /// buffer for the next step.
    pub fn residual_norm(&mut self) -> f64 {
        self.sys.residual_into(&self.h, &self.theta, &mut self.k[0]);
        self.k0_current = true;
        inf_norm(&self.k[0])
    }

    pub fn step(&mut self) -> StepOutcome {
        let dt = self.dt;
        let m = self.theta.len();
        if !self.k0_current {
            self.sys.residual_into(&self.h, &self.theta, &mut self.k[0]);
            self.k0_current = true;
        }
        for (stage, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            let (prev, rest) = self.k.split_at_mut(stage);
            for (s, (t, slope)) in self.scratch.iter_mut().zip(self.theta.iter().zip(&prev[stage - 1])) {
                *s = t + c * dt * slope;
            }
            self.sys.residual_into(&self.h, &self.scratch, &mut rest[0]);
        }
        let mut increased = false;
        let mut overshoot = false;
        for p in 0..m {
            let incr = dt / 6.0 * (self.k[0][p] + 2.0 * self.k[1][p] + 2.0 * self.k[2][p] + self.k[3][p]);
            self.trial[p] = self.theta[p] + incr;
            if self.trial[p] > self.theta[p] {
                increased = true;
                overshoot |= self.k[0][p] <= 0.0;
            }
        }
        if overshoot && self.descending && self.dt > self.min_dt {
            self.dt *= 0.5;
            return StepOutcome::Rejected;
        }
        if increased || self.k[0].iter().any(|&v| v > 0.0) {
            self.monotone_violations += 1;
        }
        if self.trial.iter().any(|&t| !(t > 0.0 && t <= FRAC_PI_4)) {
            self.bound_violations += 1;
        }
        std::mem::swap(&mut self.theta, &mut self.trial);
        self.k0_current = false;
        self.time += dt;
        self.steps += 1;
        StepOutcome::Accepted
    }

    fn report(&self, residual_inf_norm: f64) -> SolveReport {
        let state = ReducedState {
            layout: self.sys.layout,
            values: self.theta.clone(),
        };
        SolveReport {
            n: state.n(),
            min_entry: state.min_entry(),
            max_entry: state.max_entry(),
            state,
            residual_inf_norm,
            relaxation_steps: self.steps,
            newton_steps: 0,
            monotone_violations: self.monotone_violations,
            bound_violations: self.bound_violations,
            final_time_step: self.dt,
            flow_time: self.time,
        }
    }
}

/// Integrates the flow from `θ ≡ π/4` until `‖residual‖∞ < opts.tolerance`.
pub fn relax_to_equilibrium(n: usize, h: &CouplingFunction, opts: &SolverOptions) -> Result<SolveReport> {
    relax_from(ReducedState::initial(n)?, h, opts)
}

/// Same as [`relax_to_equilibrium`] from an arbitrary start.
pub fn relax_from(start: ReducedState, h: &CouplingFunction, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let mut flow = FlowIntegrator::new(start, h, opts.time_step);
    let mut attempts = 0u64;
    loop {
        let r = flow.residual_norm();
        if r < opts.tolerance {
            return Ok(flow.report(r));
        }
        if attempts >= opts.max_steps {
            return Err(Error::Convergence {
                report: Box::new(flow.report(r)),
            });
        }
        flow.step();
        attempts += 1;
    }
}

#[derive(Debug, Clone)]
pub struct Refined {
    pub state: ReducedState,
    pub iterations: usize,
    pub residual_inf_norm: f64,
}

pub const NEWTON_MAX_ITERATIONS: usize = 50;

/// Newton's method on the residual, solving with a banded Cholesky
/// factorization of `-J` (symmetric positive definite near the equilibrium).
pub fn newton_refine(state: &ReducedState, h: &CouplingFunction, tol: f64) -> Result<Refined> {
    if !(tol > 0.0) {
        return Err(Error::domain("newton tolerance must be positive"));
    }
    let sys = ReducedSystem::new(*state.layout());
    let mut theta = state.values().to_vec();
    let mut f = vec![0.0; theta.len()];
    sys.residual_into(h, &theta, &mut f);
    let mut norm = inf_norm(&f);
    let start_norm = norm;
    let mut stalled = 0;
    let mut iterations = 0;
    while norm > tol {
        if iterations == NEWTON_MAX_ITERATIONS {
            return Err(Error::Refinement(format!(
                "residual {norm:.3e} above {tol:.1e} after {iterations} iterations"
            )));
        }
        let neg_j = sys.jacobian(h, &theta).scaled_shifted(-1.0, 0.0);
        let step = BandedCholesky::factor(&neg_j)?.solve(&f);
        for (t, d) in theta.iter_mut().zip(&step) {
            *t += d;
        }
        iterations += 1;
        sys.residual_into(h, &theta, &mut f);
        let next = inf_norm(&f);
        if !next.is_finite() || next > 1e3 * start_norm.max(1e-300) {
            return Err(Error::Refinement(format!("diverged (residual {next:.3e})")));
        }
        if next >= norm {
            stalled += 1;
            if stalled >= 3 {
                return Err(Error::Refinement(format!(
                    "stalled at residual {next:.3e} above {tol:.1e}"
                )));
            }
        } else {
            stalled = 0;
        }
        norm = next;
    }
    Ok(Refined {
        state: ReducedState::new(state.n(), theta)?,
        iterations,
        residual_inf_norm: norm,
    })
}

/// Relaxation followed, when configured, by Newton refinement.
pub fn solve_equilibrium(n: usize, h: &CouplingFunction, opts: &SolverOptions) -> Result<SolveReport> {
    let mut report = relax_to_equilibrium(n, h, opts)?;
    if let Some(tol) = opts.newton_tolerance {
        if report.residual_inf_norm > tol {
            let refined = newton_refine(&report.state, h, tol)?;
            report.newton_steps = refined.iterations;
            report.residual_inf_norm = refined.residual_inf_norm;
            report.min_entry = refined.state.min_entry();
            report.max_entry = refined.state.max_entry();
            report.state = refined.state;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle for N = 2: bisection on `-2 sin θ + cos 2θ = 0`.
    fn n2_root() -> f64 {
        let f = |t: f64| -2.0 * t.sin() + (2.0 * t).cos();
        let (mut lo, mut hi) = (0.0f64, FRAC_PI_4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn sine() -> CouplingFunction {
        CouplingFunction::sine()
    }

    #[test]
    fn oracle_matches_closed_form() {
        let closed = ((3f64.sqrt() - 1.0) / 2.0).asin();
        assert!((n2_root() - closed).abs() < 1e-15);
        assert!((n2_root() - 0.3747344327087).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let r = residual_of(2, &[FRAC_PI_4], &sine()).unwrap();
        assert!((r[0] + 2f64.sqrt()).abs() < 1e-12);

        let r = residual_of(2, &[n2_root()], &sine()).unwrap();
        assert!(r[0].abs() < 1e-12);

        let r = residual_of(3, &[0.0; 3], &sine()).unwrap();
        assert_eq!(r, vec![1.0, 1.0, 0.0]);

        assert!(residual_of(3, &[0.0; 2], &sine()).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let s = ReducedState::initial(2).unwrap();
        let j = jacobian(&s, &sine());
        assert!((j.get(0, 0) + 3.414_213_562_4).abs() < 1e-10);

        let s = ReducedState::new(3, vec![0.3, 0.2, 0.1]).unwrap();
        let j = jacobian(&s, &sine());
        let off: Vec<_> = j
            .triplets()
            .filter(|(r, c, _)| r != c)
            .map(|(r, c, _)| (r, c))
            .collect();
        // (2,1)-(3,1) and (3,1)-(3,2) in reduced positions.
        assert_eq!(off, vec![(0, 1), (1, 0), (1, 2), (2, 1)]);
        assert!(j.is_symmetric());
    }

    fn fd_jacobian(state: &ReducedState, h: &CouplingFunction, step: f64) -> Vec<Vec<f64>> {
        let m = state.len();
        let mut cols = vec![vec![0.0; m]; m];
        for c in 0..m {
            let mut plus = state.clone();
            let mut minus = state.clone();
            plus.values_mut()[c] += step;
            minus.values_mut()[c] -= step;
            let rp = residual(&plus, h);
            let rm = residual(&minus, h);
            for r in 0..m {
                cols[r][c] = (rp[r] - rm[r]) / (2.0 * step);
            }
        }
        cols
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for h in [sine(), CouplingFunction::sine_harmonic()] {
            for n in [3, 5] {
                let m = n * (n - 1) / 2;
                let state = ReducedState::new(n, (0..m).map(|_| rng.gen_range(0.0..FRAC_PI_4)).collect()).unwrap();
                let exact = jacobian(&state, &h).to_dense();
                let fd = fd_jacobian(&state, &h, 1e-6);
                for r in 0..m {
                    for c in 0..m {
                        assert!((exact[r][c] - fd[r][c]).abs() <= 1e-5 * (1.0 + exact[r][c].abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn relaxation_n2() {
        let report = relax_to_equilibrium(2, &sine(), &SolverOptions::default()).unwrap();
        assert!((report.state.values()[0] - 0.3747344327087).abs() < 1e-9);
        assert_eq!(report.monotone_violations, 0);
        assert_eq!(report.bound_violations, 0);
        assert!(report.residual_inf_norm < 1e-10);
    }

    #[test]
    fn relaxation_n5_confined() {
        let report = relax_to_equilibrium(5, &sine(), &SolverOptions::default()).unwrap();
        assert!(report.min_entry > 0.0 && report.max_entry < FRAC_PI_4);
        assert_eq!(report.monotone_violations, 0);
    }

    #[test]
    fn first_step_moves_only_subdiagonal_strictly() {
        let n = 6;
        let start = ReducedState::initial(n).unwrap();
        let mut flow = FlowIntegrator::new(start.clone(), &sine(), 0.1);
        assert_eq!(flow.step(), StepOutcome::Accepted);
        for ((idx, before), after) in start.iter().zip(flow.values()) {
            if idx.j == idx.i - 1 {
                assert!(*after < before, "{idx}");
            } else {
                assert!(*after <= before, "{idx}");
            }
        }
    }

    #[test]
    fn non_convergence_carries_partial_report() {
        let opts = SolverOptions {
            max_steps: 3,
            ..SolverOptions::default()
        };
        match relax_to_equilibrium(4, &sine(), &opts) {
            Err(Error::Convergence { report }) => assert_eq!(report.relaxation_steps, 3),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn bad_options() {
        let opts = SolverOptions {
            tolerance: 0.0,
            ..SolverOptions::default()
        };
        assert!(relax_to_equilibrium(3, &sine(), &opts).is_err());
        assert!(relax_to_equilibrium(1, &sine(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn newton_examples() {
        let s = ReducedState::new(2, vec![0.37]).unwrap();
        let refined = newton_refine(&s, &sine(), 1e-13).unwrap();
        assert!((refined.state.values()[0] - 0.3747344327087).abs() < 1e-12);

        let exact = ReducedState::new(2, vec![n2_root()]).unwrap();
        let refined = newton_refine(&exact, &sine(), 1e-13).unwrap();
        assert!((refined.state.values()[0] - n2_root()).abs() < 1e-13);
    }

    #[test]
    fn newton_after_loose_relaxation_matches_tight_relaxation() {
        let h = sine();
        let loose = SolverOptions {
            tolerance: 1e-8,
            newton_tolerance: None,
            ..SolverOptions::default()
        };
        let tight = SolverOptions {
            tolerance: 1e-13,
            newton_tolerance: None,
            ..SolverOptions::default()
        };
        let start = relax_to_equilibrium(6, &h, &loose).unwrap();
        let refined = newton_refine(&start.state, &h, 1e-13).unwrap();
        assert!(refined.residual_inf_norm <= 1e-13);
        assert!(refined.iterations <= 10);
        let oracle = relax_to_equilibrium(6, &h, &tight).unwrap();
        for (a, b) in refined.state.values().iter().zip(oracle.state.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn perturbed_start_reaches_same_equilibrium() {
        let h = sine();
        let opts = SolverOptions::default();
        let a = solve_equilibrium(7, &h, &opts).unwrap();
        let start = ReducedState::constant(7, FRAC_PI_4 - 1e-3).unwrap();
        let mut b = relax_from(start, &h, &opts).unwrap();
        b.state = newton_refine(&b.state, &h, 1e-13).unwrap().state;
        for (x, y) in a.state.values().iter().zip(b.state.values()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn symmetric_jacobian_for_any_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..9 {
            let m = n * (n - 1) / 2;
            let state = ReducedState::new(n, (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let j: SparseMatrix = jacobian(&state, &CouplingFunction::sine_harmonic());
            assert!(j.is_symmetric());
            assert_eq!(j, j.transpose());
        }
    }
}
