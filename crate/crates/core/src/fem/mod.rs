//! P1 finite elements on triangulated polygons, and the polygonal domain
//! families used for the degeneration experiments.

mod assembly;
mod domain;
mod mesh;
mod solve;

pub use assembly::{boundary_mass, mass, stiffness};
pub use domain::{
    generate_mesh, generate_mesh_with, triangulate, DomainFamily, ANGLE_LIMIT_DEG, PASSAGE_RESOLUTION,
};
pub use mesh::TriMesh;
pub use solve::{observed_order, richardson, solve_neumann_fem, solve_steklov_fem, FemOptions};
