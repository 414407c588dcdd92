#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fem;
pub mod folding;
pub mod geometry;
pub mod hersch;
pub mod inertia;
pub mod linalg;
pub mod moebius;
pub mod scalar;
pub mod special;
pub mod spectral_disk;

pub use error::{Error, Result};
pub use scalar::{LinalgReal, Real};

/// Double-precision aliases.
pub type Map64 = geometry::ConformalMap<f64>;
pub type Quadrature64 = geometry::DiskQuadrature<f64>;
pub type Measure64 = geometry::DiscreteMeasure<f64>;
pub type Density64 = geometry::DensityField<f64>;
pub type Automorphism64 = moebius::DiskAutomorphism<f64>;
pub type Cap64 = moebius::HyperbolicCap<f64>;
pub type Inertia64 = inertia::InertiaForm<f64>;
pub type Spectrum64 = linalg::Spectrum<f64>;
pub type Mesh64 = fem::TriMesh<f64>;

/// Single-precision aliases.
pub type Map32 = geometry::ConformalMap<f32>;
pub type Quadrature32 = geometry::DiskQuadrature<f32>;
pub type Measure32 = geometry::DiscreteMeasure<f32>;
pub type Spectrum32 = linalg::Spectrum<f32>;
pub type Mesh32 = fem::TriMesh<f32>;
