//! Browser bindings. Each export returns a JSON string; errors become
//! JavaScript exceptions carrying the message.
//!
//! The plain Rust functions below the bindings do the work and are what the
//! native tests call.

use rotwave::export::{full_json, to_json};
use rotwave::extension::{extend_full, FullState};
use rotwave::lattice::LatticeIndex;
use rotwave::solver::{solve_equilibrium, SolverOptions};
use rotwave::spectral::{
    build_linearization, linf_decay_check, linf_required_size, smallest_eigen_of_neg_l, DEFAULT_EIGEN_TOLERANCE,
};
use rotwave::CouplingFunction;
use wasm_bindgen::prelude::*;

/// Largest half-width the page will ask for.
pub const MAX_N: usize = 40;

fn solved_field(n: usize, coupling: &str) -> Result<(FullState, CouplingFunction), String> {
    if n > MAX_N {
        return Err(format!("N = {n} is above the demo limit of {MAX_N}"));
    }
    let h = CouplingFunction::by_name(coupling).map_err(|e| e.to_string())?;
    let report = solve_equilibrium(n, &h, &SolverOptions::default()).map_err(|e| e.to_string())?;
    Ok((extend_full(&report.state), h))
}

/// Full 2N × 2N phase field as `{n, min, max, rows}`.
pub fn phase_field(n: usize, coupling: &str) -> Result<String, String> {
    solved_field(n, coupling).map(|(full, _)| full_json(&full))
}

/// Sup-norm decay table for witness ramps 1..=nmax around `(pi, pj)`.
pub fn decay_table(nmax: usize, pi: i64, pj: i64, coupling: &str) -> Result<String, String> {
    let pinned = LatticeIndex::new(pi, pj);
    let (full, h) = solved_field(linf_required_size(pinned, nmax), coupling)?;
    let table = linf_decay_check(&full, pinned, nmax, &h).map_err(|e| e.to_string())?;
    Ok(to_json(&table))
}

/// Smallest eigenvalue of the pinned operator on the window of radius `r`.
pub fn pinned_mu0(n: usize, r: usize, coupling: &str, seed: u64) -> Result<String, String> {
    let (full, h) = solved_field(n, coupling)?;
    let op = build_linearization(&full, rotwave::spectral::DEFAULT_PINNED, r, &h).map_err(|e| e.to_string())?;
    let report = smallest_eigen_of_neg_l(&op, DEFAULT_EIGEN_TOLERANCE, seed).map_err(|e| e.to_string())?;
    Ok(to_json(&report))
}

#[wasm_bindgen(js_name = phaseField)]
pub fn phase_field_js(n: usize, coupling: &str) -> Result<String, JsError> {
    phase_field(n, coupling).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = decayTable)]
pub fn decay_table_js(nmax: usize, pi: i32, pj: i32, coupling: &str) -> Result<String, JsError> {
    decay_table(nmax, pi.into(), pj.into(), coupling).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pinnedMu0)]
pub fn pinned_mu0_js(n: usize, r: usize, coupling: &str, seed: u32) -> Result<String, JsError> {
    pinned_mu0(n, r, coupling, seed.into()).map_err(|e| JsError::new(&e))
}
