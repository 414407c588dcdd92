use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::LinalgReal;

/// Eigenvalues with magnitude below this are reported as zero.
pub const ZERO_CLAMP: f64 = 1e-10;

/// A symmetric pencil `A v = lambda B v` with `B` positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigProblem<T: LinalgReal> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
}

/// Ascending eigenvalues with optional `B`-orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T: LinalgReal> {
    values: Vec<T>,
    vectors: Option<DMatrix<T>>,
    /// Discretization size (polynomial degree or vertex count).
    pub resolution: usize,
    /// Number of unknowns.
    pub dimension: usize,
}

impl<T: LinalgReal> Spectrum<T> {
    pub fn new(mut values: Vec<T>, vectors: Option<DMatrix<T>>, resolution: usize, dimension: usize) -> Self {
        for v in values.iter_mut() {
            if Float::abs(*v) < T::lit(ZERO_CLAMP) {
                *v = T::zero();
            }
        }
        Self { values, vectors, resolution, dimension }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `lambda_k`, counting from `lambda_0`.
    pub fn get(&self, k: usize) -> Option<T> {
        self.values.get(k).copied()
    }

    pub fn vectors(&self) -> Option<&DMatrix<T>> {
        self.vectors.as_ref()
    }

    pub fn vector(&self, k: usize) -> Option<DVector<T>> {
        self.vectors.as_ref().filter(|v| k < v.ncols()).map(|v| v.column(k).into_owned())
    }

    /// `lambda_k * mass` for `k = 0..count`.
    pub fn normalized(&self, mass: T, count: usize) -> Vec<T> {
        self.values.iter().take(count).map(|&v| v * mass).collect()
    }
}

impl<T: LinalgReal> GeneralizedEigProblem<T> {
    pub fn new(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() {
            return Err(Error::InvalidInput(format!("pencil shapes {:?} and {:?}", a.shape(), b.shape())));
        }
        Ok(Self { a, b })
    }

    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    /// All eigenpairs, via `B = L L^T` and the symmetric eigenproblem for
    /// `L^{-1} A L^{-T}`.
    pub fn solve(&self, resolution: usize) -> Result<Spectrum<T>> {
        let n = self.dimension();
        let chol = self.b.clone().cholesky().ok_or(Error::IndefiniteMass)?;
        let l = chol.l();
        let mut c = self.a.clone();
        if !l.solve_lower_triangular_mut(&mut c) {
            return Err(Error::IndefiniteMass);
        }
        let mut ct = c.transpose();
        if !l.solve_lower_triangular_mut(&mut ct) {
            return Err(Error::IndefiniteMass);
        }
        let c = (&ct + ct.transpose()) * T::lit(0.5);
        let max_iter = 64 * n.max(8);
        let eig = SymmetricEigen::try_new(c, T::default_epsilon(), max_iter)
            .ok_or(Error::EigenNotConverged { iterations: max_iter, trace: Vec::new() })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
        let values: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut y = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            y.set_column(col, &eig.eigenvectors.column(i));
        }
        let lt = l.transpose();
        if !lt.solve_upper_triangular_mut(&mut y) {
            return Err(Error::IndefiniteMass);
        }
        Ok(Spectrum::new(values, Some(y), resolution, n))
    }

    /// `||A v - lambda B v|| / ||B v||`.
    pub fn residual(&self, lambda: T, v: &DVector<T>) -> T {
        let bv = &self.b * v;
        let r = &self.a * v - &bv * lambda;
        r.norm() / bv.norm()
    }
}

/// The `k`-th eigenpair (from `lambda_0`), checked against the residual
/// bound `||A v - lambda B v|| <= 1e-8 ||B v||`.
pub fn eigen_k<T: LinalgReal>(problem: &GeneralizedEigProblem<T>, k: usize) -> Result<(T, DVector<T>)> {
    if k >= problem.dimension() {
        return Err(Error::InvalidInput(format!("k = {k} but the pencil has dimension {}", problem.dimension())));
    }
    let spectrum = problem.solve(problem.dimension())?;
    let v = spectrum.vector(k).ok_or(Error::IndefiniteMass)?;
    let lambda = spectrum.values()[k];
    let res = problem.residual(lambda, &v);
    let scale = Float::max(T::one(), Float::abs(lambda));
    if !(res <= T::tol(1e-8) * scale) {
        return Err(Error::EigenNotConverged { iterations: 1, trace: vec![res.as_f64()] });
    }
    Ok((lambda, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_pencil() {
        let p = GeneralizedEigProblem::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0])),
            DMatrix::identity(3, 3),
        )
        .unwrap();
        let (l, v) = eigen_k(&p, 1).unwrap();
        assert!((l - 1.0f64).abs() < 1e-15);
        assert!((v[1].abs() - 1.0).abs() < 1e-15);
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &m * m.transpose() + DMatrix::identity(n, n) * shift
    }

    /// Roots of `det(A - lambda B)` by a sign scan and bisection.
    fn determinant_oracle(a: &DMatrix<f64>, b: &DMatrix<f64>, hi: f64) -> Vec<f64> {
        let det = |x: f64| (a - b * x).determinant();
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut x0 = -1e-3;
        let mut d0 = det(x0);
        for s in 1..=steps {
            let x1 = hi * s as f64 / steps as f64;
            let d1 = det(x1);
            if d0 == 0.0 || d0.signum() != d1.signum() {
                let (mut lo, mut up) = (x0, x1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + up);
                    if det(mid).signum() == det(lo).signum() {
                        lo = mid;
                    } else {
                        up = mid;
                    }
                }
                roots.push(0.5 * (lo + up));
            }
            x0 = x1;
            d0 = d1;
        }
        roots
    }

    #[test]
    fn random_pencil_matches_determinant_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..3 {
            let a = random_spd(&mut rng, 6, 0.1);
            let b = random_spd(&mut rng, 6, 0.5);
            let p = GeneralizedEigProblem::new(a.clone(), b.clone()).unwrap();
            let s = p.solve(6).unwrap();
            let hi = s.values()[5] * 1.1 + 1.0;
            let roots = determinant_oracle(&a, &b, hi);
            assert_eq!(roots.len(), 6);
            for (x, y) in s.values().iter().zip(&roots) {
                assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} vs {y}");
            }
            // B-orthonormal eigenvectors and small residuals.
            let v = s.vectors().unwrap();
            let gram = v.transpose() * &b * v;
            assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-10);
            for k in 0..6 {
                assert!(p.residual(s.values()[k], &s.vector(k).unwrap()) < 1e-10);
            }
        }
    }

    #[test]
    fn indefinite_mass_rejected() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let p = GeneralizedEigProblem::new(DMatrix::identity(2, 2), b).unwrap();
        assert!(matches!(p.solve(2), Err(Error::IndefiniteMass)));
    }

    #[test]
    fn works_in_single_precision() {
        let a = DMatrix::<f32>::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let p = GeneralizedEigProblem::new(a, DMatrix::identity(3, 3) * 2.0).unwrap();
        let s = p.solve(3).unwrap();
        assert!((s.values()[0] - 0.5).abs() < 1e-6 && (s.values()[2] - 1.5).abs() < 1e-6);
    }
}
