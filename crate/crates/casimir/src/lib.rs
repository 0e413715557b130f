//! Thermal Casimir interactions between layered planar bodies.
//!
//! The crate computes finite-temperature Casimir free energies, pressures
//! and pressure gradients for a vacuum gap between two layered half-spaces,
//! and maps them to sphere-plate observables through the proximity force
//! approximation. A small CLI (`casimir`) drives separation sweeps over a
//! two-substrate apparatus, a validation suite against closed-form limits,
//! and tabulation of the configured dielectric models.

pub mod cli;
pub mod config;
pub mod constants;
pub mod lifshitz;
pub mod materials;
pub mod pfa;
pub mod quad;
pub mod strata;
pub mod validation;
