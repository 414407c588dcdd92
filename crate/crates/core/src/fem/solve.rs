use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_traits::Float;

use super::assembly::{boundary_mass, mass, stiffness};
use super::mesh::TriMesh;
use crate::error::{Error, Result};
use crate::linalg::{lobpcg, GeneralizedEigProblem, LobpcgOptions, SparseCholesky, Spectrum};
use crate::scalar::LinalgReal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemOptions {
    /// Eigenvalues wanted, counting `lambda_0`.
    pub count: usize,
    /// Problems with fewer unknowns use the dense solver.
    pub dense_threshold: usize,
    pub lobpcg: LobpcgOptions,
}

impl Default for FemOptions {
    fn default() -> Self {
        Self { count: 12, dense_threshold: 2000, lobpcg: LobpcgOptions::default() }
    }
}

impl FemOptions {
    pub fn with_count(count: usize) -> Self {
        Self { count, ..Self::default() }
    }
}

fn truncate<T: LinalgReal>(s: Spectrum<T>, count: usize, resolution: usize) -> Spectrum<T> {
    let k = count.min(s.len());
    let values = s.values()[..k].to_vec();
    let vectors = s.vectors().map(|v| v.columns(0, k).into_owned());
    Spectrum::new(values, vectors, resolution, s.dimension)
}

/// Lowest Neumann eigenvalues of the P1 discretization.
pub fn solve_neumann_fem<T: LinalgReal>(mesh: &TriMesh<T>, opts: &FemOptions) -> Result<Spectrum<T>> {
    let a = stiffness(mesh);
    let b = mass(mesh);
    let n = mesh.vertex_count();
    if n < opts.dense_threshold || opts.count >= n {
        let p = GeneralizedEigProblem::new(DMatrix::from(&a), DMatrix::from(&b))?;
        return Ok(truncate(p.solve(n)?, opts.count, n));
    }
    let out = lobpcg(&a, &b, opts.count, &opts.lobpcg)?;
    Ok(truncate(out.spectrum, opts.count, n))
}

/// Lowest Steklov eigenvalues: the stiffness is condensed onto the boundary
/// (its Schur complement is the discrete Dirichlet-to-Neumann map) and paired
/// with the boundary mass.
pub fn solve_steklov_fem<T: LinalgReal>(mesh: &TriMesh<T>, opts: &FemOptions) -> Result<Spectrum<T>> {
    let a = stiffness(mesh);
    let bm = boundary_mass(mesh);
    let n = mesh.vertex_count();
    let bnd = mesh.boundary_vertices();
    let mut slot = vec![None; n];
    for (k, &v) in bnd.iter().enumerate() {
        slot[v] = Some(k);
    }
    let interior: Vec<usize> = (0..n).filter(|&v| slot[v].is_none()).collect();
    let mut islot = vec![usize::MAX; n];
    for (k, &v) in interior.iter().enumerate() {
        islot[v] = k;
    }
    let nb = bnd.len();
    let ni = interior.len();
    let mut abb = DMatrix::zeros(nb, nb);
    let mut aib = DMatrix::zeros(ni, nb);
    let mut aii = CooMatrix::new(ni, ni);
    for (i, j, &v) in a.triplet_iter() {
        match (slot[i], slot[j]) {
            (Some(p), Some(q)) => abb[(p, q)] += v,
            (None, Some(q)) => aib[(islot[i], q)] += v,
            (None, None) => aii.push(islot[i], islot[j], v),
            (Some(_), None) => {}
        }
    }
    let mut schur = abb;
    if ni > 0 {
        let chol = SparseCholesky::new(&CsrMatrix::from(&aii))?;
        let x = chol.solve(&aib);
        schur -= aib.tr_mul(&x);
    }
    let mut mb = DMatrix::zeros(nb, nb);
    for (i, j, &v) in bm.triplet_iter() {
        if let (Some(p), Some(q)) = (slot[i], slot[j]) {
            mb[(p, q)] += v;
        }
    }
    let schur = (&schur + schur.transpose()) * T::lit(0.5);
    let p = GeneralizedEigProblem::new(schur, mb)?;
    Ok(truncate(p.solve(nb)?, opts.count, n))
}

/// Richardson extrapolation from values on meshes of sizes `h`, assuming
/// error `C h^order`; uses the two finest levels.
pub fn richardson<T: LinalgReal>(h: &[T], values: &[T], order: T) -> Result<T> {
    if h.len() != values.len() || h.len() < 2 {
        return Err(Error::InvalidInput("richardson needs two or more levels".into()));
    }
    let n = h.len();
    let r = Float::powf(h[n - 2] / h[n - 1], order);
    if !(r > T::one()) {
        return Err(Error::InvalidInput("mesh sizes must decrease".into()));
    }
    Ok(values[n - 1] + (values[n - 1] - values[n - 2]) / (r - T::one()))
}

/// Observed convergence order from three levels.
pub fn observed_order<T: LinalgReal>(h: &[T; 3], values: &[T; 3]) -> T {
    let d1 = values[0] - values[1];
    let d2 = values[1] - values[2];
    let ratio = (h[0] / h[1] + h[1] / h[2]) / T::lit(2.0);
    Float::ln(Float::abs(d1 / d2)) / Float::ln(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{generate_mesh, DomainFamily};
    use crate::special::find_zeta;
    use std::f64::consts::PI;

    #[test]
    fn square_neumann_dense_and_sparse() {
        let m: TriMesh<f64> = generate_mesh(&DomainFamily::Square, 1.0 / 30.0).unwrap();
        let dense = solve_neumann_fem(&m, &FemOptions::with_count(6)).unwrap();
        let sparse = solve_neumann_fem(&m, &FemOptions { dense_threshold: 10, ..FemOptions::with_count(6) }).unwrap();
        assert_eq!(dense.values()[0], 0.0);
        for k in 0..6 {
            let (a, b) = (dense.values()[k], sparse.values()[k]);
            assert!((a - b).abs() < 1e-7 * a.max(1.0), "{k}: {a} {b}");
        }
        assert!((dense.values()[1] / (PI * PI) - 1.0).abs() < 0.01);
        assert!(dense.values()[1] > PI * PI);
    }

    #[test]
    fn disk_steklov() {
        let m: TriMesh<f64> = generate_mesh(&DomainFamily::DiskPolygon { n: 512 }, 0.05).unwrap();
        let s = solve_steklov_fem(&m, &FemOptions::default()).unwrap();
        assert_eq!(s.values()[0], 0.0);
        for k in [1, 2] {
            assert!((s.values()[k] - 1.0).abs() < 0.01, "{}", s.values()[k]);
        }
        assert!((s.values()[3] - 2.0).abs() < 0.02);
    }

    #[test]
    fn disk_neumann_richardson() {
        let z2 = find_zeta::<f64>().powi(2);
        let mut hs = Vec::new();
        let mut vals = Vec::new();
        for h in [0.1, 0.05, 0.025] {
            let m: TriMesh<f64> = generate_mesh(&DomainFamily::DiskPolygon { n: 512 }, h).unwrap();
            let s = solve_neumann_fem(&m, &FemOptions::with_count(4)).unwrap();
            hs.push(m.mean_size());
            vals.push(s.values()[1]);
        }
        let ex = richardson(&hs, &vals, 2.0).unwrap();
        assert!((ex / z2 - 1.0).abs() < 0.005, "{vals:?} -> {ex}");
    }

    #[test]
    fn scaling_invariance() {
        let m: TriMesh<f64> = generate_mesh(&DomainFamily::Ellipse { a: 1.5, b: 1.0, n: 128 }, 0.15).unwrap();
        let m2 = m.scaled(2.5);
        let opts = FemOptions::with_count(5);
        let (a, b) = (solve_neumann_fem(&m, &opts).unwrap(), solve_neumann_fem(&m2, &opts).unwrap());
        let (c, d) = (solve_steklov_fem(&m, &opts).unwrap(), solve_steklov_fem(&m2, &opts).unwrap());
        for k in 1..5 {
            assert!((a.values()[k] * m.area() - b.values()[k] * m2.area()).abs() < 1e-9);
            assert!((c.values()[k] * m.perimeter() - d.values()[k] * m2.perimeter()).abs() < 1e-9);
        }
    }

    #[test]
    fn richardson_recovers_quadratic_model() {
        let h = [0.4, 0.2, 0.1];
        let v: Vec<f64> = h.iter().map(|x| 3.0 + 5.0 * x * x).collect();
        assert!((richardson(&h, &v, 2.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((observed_order(&h, &[v[0], v[1], v[2]]) - 2.0).abs() < 1e-12);
    }
}
