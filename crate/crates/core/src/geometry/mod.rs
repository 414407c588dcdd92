//! Conformal maps from the disk, disk quadrature, discrete measures on the
//! closed disk, densities, and the growth and comparison checks for
//! subharmonic weights.

mod density;
mod growth;
mod map;
mod measure;
mod quadrature;

pub use density::{
    gaussian_curvature, pullback_area_measure, pullback_boundary_measure, AnalyticDensity,
    CurvatureField, DensityField, PointDensity, PullbackDensity, CURVATURE_SPACING,
};
pub use growth::{
    check_subharmonic_growth, growth_function, growth_profile, radial_comparison, ComparisonReport,
    GrowthReport,
};
pub use map::ConformalMap;
pub use measure::{DiscreteMeasure, MeasurePart};
pub use quadrature::{gauss_legendre_unit, DiskQuadrature};

use num_complex::Complex;

use crate::scalar::Real;

/// `e^{i theta}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Euclidean inner product of two plane vectors stored as complex numbers.
#[inline]
pub fn dot<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    a.re * b.re + a.im * b.im
}
