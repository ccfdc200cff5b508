//! Simulation of a spin-dependent-displacement interferometer.
//!
//! A particle's spin is coupled to its momentum so that each spin projection
//! `m` picks up a distinct spatial displacement proportional to the applied
//! magnetic field. Free evolution then disperses and overlaps the displaced
//! Gaussian branches, producing spatial interference fringes whose spacing,
//! phase, and contrast encode the field. The crate covers the full chain:
//!
//! * [`params`], [`spin`], [`wavepacket`], [`state`] — physical parameters,
//!   spin superpositions, analytic Gaussian branches, and the entangled
//!   spin-position state.
//! * [`dynamics`] — the entangling map, analytic free evolution, and an
//!   independent spectral (FFT) propagator used as a cross-check oracle.
//! * [`interference`] — fringe densities, spacing/visibility laws, field
//!   inversion, and a blind fringe-parameter extractor.
//! * [`metrology`] — quantum Fisher information and Cramér-Rao bounds, both
//!   as published closed forms and via a fidelity-susceptibility oracle,
//!   including the N-particle cat-state machinery.
//! * [`estimation`] — seeded Monte Carlo position sampling, maximum-likelihood
//!   field fits, and sensitivity-scaling experiments.
//! * [`csvio`] — the CSV schemas shared with the command-line front end.
//!
//! All quantities are strict SI; `hbar` is pinned to the CODATA value in
//! [`constants`].

// Validation guards are written `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod half;
pub mod interference;
pub mod metrology;
pub mod params;
pub mod rng;
pub mod spin;
pub mod state;
pub mod stats;
pub mod wavepacket;

pub use error::{Error, Result};
pub use half::HalfInt;
pub use params::ParamSet;
