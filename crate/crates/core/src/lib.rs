//! Deformed polaron–antipolaron variational treatment of the quantum Rabi
//! model, H = ω a†a + (Ω/2) σ_x + g σ_z (a† + a), with an exact
//! diagonalization reference.
//!
//! The crate is organized bottom-up:
//!
//! - [`params`]: inputs and the analytic coupling scales.
//! - [`overlaps`]: closed-form integrals of displaced, squeezed oscillator states.
//! - [`variational`]: energy functional, observables and the simplex minimizer.
//! - [`exact`]: truncated-Fock diagonalization in one or two modes.
//! - [`potential`]: tunneling-induced effective potential and its two-well expansion.
//! - [`diagram`]: coupling sweeps, region classification and boundary searches.
//! - [`multimode`]: the product ansatz for several oscillator modes.

pub mod diagram;
pub mod error;
pub mod exact;
pub mod multimode;
pub mod optimize;
pub mod overlaps;
pub mod params;
pub mod potential;
pub mod variational;

pub use error::{RabiError, Result};
pub use params::{
    changeover_coupling, derive, semiclassical_coupling, DerivedParams, ModelParams, Parity, RegionLabel,
};
pub use variational::{Channels, ConstraintSet, Observables, OptimizerConfig, VariationalSolution, VariationalState};
