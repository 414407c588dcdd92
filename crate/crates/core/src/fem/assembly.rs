use nalgebra_sparse::{CooMatrix, CsrMatrix};
use rayon::prelude::*;

use super::mesh::TriMesh;
use crate::scalar::Real;

const CHUNK: usize = 4096;

type Triplets<T> = Vec<(usize, usize, T)>;

/// Element contributions gathered in parallel, summed in element order.
fn gather<T: Real>(n: usize, items: usize, element: impl Fn(usize, &mut Triplets<T>) + Sync) -> CsrMatrix<T> {
    let chunks: Vec<Triplets<T>> = (0..items.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::with_capacity(CHUNK * 9);
            for k in c * CHUNK..((c + 1) * CHUNK).min(items) {
                element(k, &mut out);
            }
            out
        })
        .collect();
    let mut coo = CooMatrix::new(n, n);
    for chunk in chunks {
        for (i, j, v) in chunk {
            coo.push(i, j, v);
        }
    }
    CsrMatrix::from(&coo)
}

/// P1 stiffness `int grad phi_i . grad phi_j`.
pub fn stiffness<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    let v = mesh.vertices();
    gather(mesh.vertex_count(), mesh.triangle_count(), |k, out| {
        let t = mesh.triangles()[k];
        let area = mesh.triangle_area(k);
        // Gradient of the hat at t[e] is the rotated opposite edge / (2 area).
        let g: [[T; 2]; 3] = std::array::from_fn(|e| {
            let a = v[t[(e + 1) % 3]];
            let b = v[t[(e + 2) % 3]];
            [a[1] - b[1], b[0] - a[0]]
        });
        let scale = T::one() / (T::lit(4.0) * area);
        for i in 0..3 {
            for j in 0..3 {
                out.push((t[i], t[j], (g[i][0] * g[j][0] + g[i][1] * g[j][1]) * scale));
            }
        }
    })
}

/// Consistent P1 mass `int phi_i phi_j`.
pub fn mass<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    gather(mesh.vertex_count(), mesh.triangle_count(), |k, out| {
        let t = mesh.triangles()[k];
        let a = mesh.triangle_area(k) / T::lit(12.0);
        for i in 0..3 {
            for j in 0..3 {
                out.push((t[i], t[j], if i == j { a + a } else { a }));
            }
        }
    })
}

/// Consistent P1 boundary mass `oint phi_i phi_j ds` over the boundary edges.
pub fn boundary_mass<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    let v = mesh.vertices();
    gather(mesh.vertex_count(), mesh.boundary_edges().len(), |k, out| {
        let [a, b] = mesh.boundary_edges()[k];
        let len = num_traits::Float::hypot(v[a][0] - v[b][0], v[a][1] - v[b][1]) / T::lit(6.0);
        out.push((a, a, len + len));
        out.push((b, b, len + len));
        out.push((a, b, len));
        out.push((b, a, len));
    })
}
