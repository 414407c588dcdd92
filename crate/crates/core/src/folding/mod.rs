//! Folding a measure across a hyperbolic cap, rearranging it onto the disk,
//! and the energies of the lifted test functions.

mod cap_map;
mod energy;
mod fold;

pub use cap_map::CapConformalMap;
pub use energy::{
    cap_energy, folded_boundary_values, folded_rayleigh_bound, harmonic_extension, lifted_energy, rayleigh_bound,
    test_function_energy, HarmonicExtension, RayleighBound,
};
pub use fold::{fold, lift, rearranged, FoldingMap, RearrangedMeasure, Rearranger, MASS_LOSS_BUDGET};
