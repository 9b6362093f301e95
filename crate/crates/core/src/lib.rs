//! Phase-locked rotating waves on square lattices of nearest-neighbour
//! coupled phase oscillators.
//!
//! The crate computes equilibria of the reduced phase system on `2N × 2N`
//! lattices, extends them to the full lattice by symmetry, checks the
//! monotonicity structure of the family `N ↦ θ̄⁽ᴺ⁾`, and studies the
//! linearization about the rotating wave on the lattice with one cell pinned.
//! A Lambda-Omega lattice simulator measures how well the phase model
//! describes the underlying complex oscillators at weak coupling.

pub mod coupling;
pub mod error;
pub mod export;
pub mod extension;
pub mod family;
pub mod lambda_omega;
pub mod lattice;
pub mod solver;
pub mod sparse;
pub mod spectral;

pub use coupling::{validate_coupling, CouplingFunction, ValidationReport};
pub use error::{Error, Result};
pub use extension::{extend_full, full_residual, ring_profile, FullState, Phase, RingProfile};
pub use family::{EquilibriumFamily, Extrapolation, Violation};
pub use lattice::{lattice_distance, neighbors_reduced, reduced_indices, LatticeIndex, NeighborRef};
pub use solver::{
    jacobian, newton_refine, relax_to_equilibrium, residual, solve_equilibrium, ReducedState, SolveReport,
    SolverOptions,
};
pub use spectral::{LinearizationOperator, SpectralReport};
