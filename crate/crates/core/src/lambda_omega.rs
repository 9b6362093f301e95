//! Lattice of Lambda-Omega oscillators with discrete diffusive coupling,
//!
//! ```text
//! ż_c = α Σ_d (z_d − z_c) + (1 + iω) z_c − z_c |z_c|²,
//! ```
//!
//! summed over the neighbours inside a `2N × 2N` window. Each uncoupled cell
//! has the unit circle as its attracting limit cycle, and at weak coupling the
//! phases follow the sine-coupled phase model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{wrap_angle, FullState};
use crate::lattice::{FullLayout, LatticeIndex};

/// Any modulus above this counts as blow-up.
pub const BLOW_UP_MODULUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLatticeState {
    layout: FullLayout,
    pub z: Vec<Complex64>,
    pub alpha: f64,
    pub omega: f64,
}

impl ComplexLatticeState {
    pub fn new(n: usize, z: Vec<Complex64>, alpha: f64, omega: f64) -> Result<Self> {
        let layout = FullLayout::new(n)?;
        if z.len() != layout.len() {
            return Err(Error::domain(format!(
                "window of N = {n} has {} cells, got {}",
                layout.len(),
                z.len()
            )));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::domain("coupling strength must be finite and ≥ 0"));
        }
        if !omega.is_finite() {
            return Err(Error::domain("frequency must be finite"));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("initial field has non-finite entries"));
        }
        Ok(ComplexLatticeState {
            layout,
            z,
            alpha,
            omega,
        })
    }

    /// `z_c = e^{iθ_c}` from a phase field.
    pub fn from_phases(phases: &FullState, alpha: f64, omega: f64) -> Result<Self> {
        let z = phases
            .radians()
            .iter()
            .map(|&t| Complex64::from_polar(1.0, t))
            .collect();
        Self::new(phases.n(), z, alpha, omega)
    }

    pub fn layout(&self) -> &FullLayout {
        &self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn max_modulus(&self) -> f64 {
        self.z.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorOptions {
    /// Absolute and relative local error target.
    pub tolerance: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: u64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            tolerance: 1e-8,
            initial_step: 1e-3,
            max_step: 0.5,
            max_steps: 10_000_000,
        }
    }
}

/// Neighbour lists and the right-hand side in interleaved re/im storage.
struct Rhs {
    alpha: f64,
    omega: f64,
    neighbours: Vec<Vec<usize>>,
}

impl Rhs {
    fn new(state: &ComplexLatticeState) -> Self {
        let layout = state.layout;
        Rhs {
            alpha: state.alpha,
            omega: state.omega,
            neighbours: layout
                .indices()
                .map(|c| layout.neighbor_positions(c).collect())
                .collect(),
        }
    }

    fn eval(&self, y: &[f64], dy: &mut [f64]) {
        for (c, nbs) in self.neighbours.iter().enumerate() {
            let (re, im) = (y[2 * c], y[2 * c + 1]);
            let r2 = re * re + im * im;
            let (mut cre, mut cim) = (0.0, 0.0);
            for &d in nbs {
                cre += y[2 * d] - re;
                cim += y[2 * d + 1] - im;
            }
            // (1 + iω)z − z|z|²
            dy[2 * c] = self.alpha * cre + re - self.omega * im - re * r2;
            dy[2 * c + 1] = self.alpha * cim + im + self.omega * re - im * r2;
        }
    }
}

// Dormand–Prince 5(4) coefficients. The system is autonomous, so the stage
// times are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive explicit integrator for the lattice.
pub struct Simulator {
    rhs: Rhs,
    layout: FullLayout,
    y: Vec<f64>,
    t: f64,
    h: f64,
    opts: IntegratorOptions,
    k: Vec<Vec<f64>>,
    scratch: Vec<f64>,
    accepted: u64,
    rejected: u64,
}

impl Simulator {
    pub fn new(init: &ComplexLatticeState, opts: IntegratorOptions) -> Result<Self> {
        if !(opts.tolerance > 0.0) || !(opts.initial_step > 0.0) || !(opts.max_step > 0.0) {
            return Err(Error::domain("integrator tolerance and steps must be positive"));
        }
        let modulus = init.max_modulus();
        if modulus > BLOW_UP_MODULUS {
            return Err(Error::Instability { time: 0.0, modulus });
        }
        let rhs = Rhs::new(init);
        let y: Vec<f64> = init.z.iter().flat_map(|v| [v.re, v.im]).collect();
        let dim = y.len();
        let mut k = vec![vec![0.0; dim]; 7];
        rhs.eval(&y, &mut k[0]);
        Ok(Simulator {
            rhs,
            layout: init.layout,
            y,
            t: 0.0,
            h: opts.initial_step.min(opts.max_step),
            opts,
            k,
            scratch: vec![0.0; dim],
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn accepted_steps(&self) -> u64 {
        self.accepted
    }

    pub fn rejected_steps(&self) -> u64 {
        self.rejected
    }

    pub fn state(&self) -> ComplexLatticeState {
        ComplexLatticeState {
            layout: self.layout,
            z: self.y.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
            alpha: self.rhs.alpha,
            omega: self.rhs.omega,
        }
    }

    /// Integrates to `t_end`, calling `observe` after every accepted step.
    pub fn advance_to(&mut self, t_end: f64, mut observe: impl FnMut(f64, &[f64])) -> Result<()> {
        let tol = self.opts.tolerance;
        while self.t < t_end {
            if self.accepted + self.rejected >= self.opts.max_steps {
                return Err(Error::domain(format!(
                    "step budget of {} exhausted at t = {}",
                    self.opts.max_steps, self.t
                )));
            }
            let last = self.t + self.h >= t_end;
            let h = if last { t_end - self.t } else { self.h };
            for s in 1..7 {
                for (m, out) in self.scratch.iter_mut().enumerate() {
                    let mut acc = self.y[m];
                    for (r, a) in A[s][..s].iter().enumerate() {
                        acc += h * a * self.k[r][m];
                    }
                    *out = acc;
                }
                self.rhs.eval(&self.scratch, &mut self.k[s]);
            }
            // scratch now holds the fifth-order solution (stage 7 uses the
            // fifth-order weights), k[6] its derivative.
            let mut err = 0.0f64;
            for m in 0..self.y.len() {
                let e: f64 = h * (0..7).map(|s| E[s] * self.k[s][m]).sum::<f64>();
                let scale = tol + tol * self.y[m].abs().max(self.scratch[m].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                return Err(Error::Instability {
                    time: self.t,
                    modulus: f64::INFINITY,
                });
            }
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.scratch);
                self.k.swap(0, 6);
                self.accepted += 1;
                let modulus = self.y.chunks(2).map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
                if modulus > BLOW_UP_MODULUS {
                    return Err(Error::Instability { time: self.t, modulus });
                }
                observe(self.t, &self.y);
            } else {
                self.rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !last || err > 1.0 {
                self.h = (h * factor).min(self.opts.max_step);
            }
            if self.h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::Instability {
                    time: self.t,
                    modulus: self.state().max_modulus(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexLatticeState>,
}

impl Trajectory {
    /// Rows `(t, i, j, Re z, Im z)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, LatticeIndex, Complex64)> + '_ {
        self.times
            .iter()
            .zip(&self.states)
            .flat_map(|(&t, s)| s.layout.indices().zip(s.z.iter().copied()).map(move |(c, z)| (t, c, z)))
    }
}

/// Integrates to `t_end`, sampling every `interval` time units (and at `0`
/// and `t_end`).
pub fn simulate(init: &ComplexLatticeState, t_end: f64, interval: f64, opts: IntegratorOptions) -> Result<Trajectory> {
    if !(t_end > 0.0) || !(interval > 0.0) {
        return Err(Error::domain("end time and sampling interval must be positive"));
    }
    let mut sim = Simulator::new(init, opts)?;
    let mut times = vec![0.0];
    let mut states = vec![init.clone()];
    let count = (t_end / interval).ceil() as usize;
    for s in 1..=count {
        let t = (s as f64 * interval).min(t_end);
        sim.advance_to(t, |_, _| {})?;
        times.push(t);
        states.push(sim.state());
    }
    Ok(Trajectory { times, states })
}

/// Modulus and phase in the frame rotating at `Ω`: `z = r e^{i(Ωt + θ)}`,
/// with `θ` in `(-π, π]`.
pub fn polar_decompose(state: &ComplexLatticeState, t: f64, big_omega: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = Vec::with_capacity(state.z.len());
    let mut theta = Vec::with_capacity(state.z.len());
    for (c, z) in state.layout.indices().zip(&state.z) {
        let m = z.norm();
        if m == 0.0 {
            return Err(Error::Decomposition { i: c.i, j: c.j });
        }
        r.push(m);
        theta.push(wrap_angle(z.arg() - wrap_angle(big_omega * t)));
    }
    Ok((r, theta))
}

/// Inverse of [`polar_decompose`].
pub fn polar_compose(r: &[f64], theta: &[f64], t: f64, big_omega: f64) -> Vec<Complex64> {
    r.iter()
        .zip(theta)
        .map(|(&m, &th)| Complex64::from_polar(m, big_omega * t + th))
        .collect()
}

/// Solution of `ṙ = r(1 − r²)` from `r₀`.
pub fn uncoupled_modulus(r0: f64, t: f64) -> f64 {
    r0 / (r0 * r0 + (1.0 - r0 * r0) * (-2.0 * t).exp()).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub alpha: f64,
    pub omega: f64,
    pub n: usize,
    pub t_end: f64,
    /// `max_t max_c ||z_c| − 1|`.
    pub amplitude_deviation: f64,
    /// `max_t max_edges |Δθ(t) − Δθ̄|`, phase differences wrapped to `(-π, π]`.
    pub phase_drift: f64,
    pub accepted_steps: u64,
}

/// Starts the lattice on `z = e^{iθ̄}` and measures how far moduli and edge
/// phase differences move from the phase-model equilibrium up to `t_end`.
pub fn reduction_error(
    alpha: f64,
    omega: f64,
    phase_eq: &FullState,
    t_end: f64,
    opts: IntegratorOptions,
) -> Result<ReductionReport> {
    if !(alpha > 0.0) {
        return Err(Error::domain("coupling strength must be positive"));
    }
    if !(t_end > 0.0) {
        return Err(Error::domain("end time must be positive"));
    }
    let init = ComplexLatticeState::from_phases(phase_eq, alpha, omega)?;
    let layout = *phase_eq.layout();
    let edges: Vec<(usize, usize, f64)> = layout
        .indices()
        .enumerate()
        .flat_map(|(a, c)| {
            [LatticeIndex::new(c.i + 1, c.j), LatticeIndex::new(c.i, c.j + 1)]
                .into_iter()
                .filter_map(move |d| layout.position(d))
                .map(move |b| (a, b))
        })
        .map(|(a, b)| (a, b, phase_eq.phases()[b].difference(phase_eq.phases()[a])))
        .collect();
    let mut amp = 0.0f64;
    let mut drift = 0.0f64;
    let mut sim = Simulator::new(&init, opts)?;
    sim.advance_to(t_end, |_, y| {
        for p in y.chunks(2) {
            amp = amp.max((p[0].hypot(p[1]) - 1.0).abs());
        }
        for &(a, b, eq) in &edges {
            let za = Complex64::new(y[2 * a], y[2 * a + 1]);
            let zb = Complex64::new(y[2 * b], y[2 * b + 1]);
            drift = drift.max(wrap_angle((zb * za.conj()).arg() - eq).abs());
        }
    })?;
    Ok(ReductionReport {
        alpha,
        omega,
        n: phase_eq.n(),
        t_end,
        amplitude_deviation: amp,
        phase_drift: drift,
        accepted_steps: sim.accepted_steps(),
    })
}
