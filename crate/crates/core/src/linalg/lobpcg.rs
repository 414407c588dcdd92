use nalgebra::{DMatrix, SymmetricEigen};
use nalgebra_sparse::CsrMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::Spectrum;
use super::sparse::{shifted, SparseCholesky};
use crate::error::{Error, Result};
use crate::scalar::LinalgReal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobpcgOptions {
    /// Relative residual `||A x - lambda B x|| / (max(1, lambda) ||B x||)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra block columns beyond the wanted count.
    pub guard: usize,
    /// Shift `s` of the preconditioner `(A + s B)^{-1}`, relative to
    /// `tr A / tr B`.
    pub relative_shift: f64,
    pub seed: u64,
}

impl Default for LobpcgOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 300, guard: 8, relative_shift: 1e-4, seed: 7 }
    }
}

/// Result of a block solve with the per-iteration worst residual.
#[derive(Debug, Clone)]
pub struct LobpcgOutcome<T: LinalgReal> {
    pub spectrum: Spectrum<T>,
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
}

/// Smallest `count` eigenpairs of `A x = lambda B x` by LOBPCG, preconditioned
/// with a sparse Cholesky factorization of `A + s B`.
pub fn lobpcg<T: LinalgReal>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    count: usize,
    opts: &LobpcgOptions,
) -> Result<LobpcgOutcome<T>> {
    let n = a.nrows();
    if b.nrows() != n || b.ncols() != n || n != a.ncols() {
        return Err(Error::InvalidInput("pencil shapes differ".into()));
    }
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("{count} eigenpairs of a pencil of dimension {n}")));
    }
    let m = (count + opts.guard.max(count / 4)).min(n);
    let trace = |x: &CsrMatrix<T>| x.diagonal_as_csr().values().iter().copied().sum::<T>();
    let shift = T::lit(opts.relative_shift) * trace(a) / trace(b);
    let precond = SparseCholesky::new(&shifted(a, b, shift))?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let x0 = DMatrix::from_fn(n, m, |_, _| T::lit(rng.random::<f64>() - 0.5));
    let x0 = precond.solve(&x0);
    let q0 = orthonormal_complement(b, None, x0).ok_or(Error::IndefiniteMass)?;
    if q0.ncols() < m {
        return Err(Error::IndefiniteMass);
    }
    let (mut x, mut lambda, _) = rayleigh_ritz(a, &q0, m).ok_or(Error::IndefiniteMass)?;
    let mut p: Option<DMatrix<T>> = None;
    let mut residual_trace = Vec::new();
    let tol = T::tol(opts.tolerance);
    for it in 0..opts.max_iterations {
        let bx = b * &x;
        let mut r = a * &x;
        let mut worst = T::zero();
        let mut active = Vec::with_capacity(m);
        for (j, &lam) in lambda.iter().enumerate().take(m) {
            let mut col = r.column_mut(j);
            col.axpy(-lam, &bx.column(j), T::one());
            let rel = col.norm() / (bx.column(j).norm() * Float::max(T::one(), Float::abs(lam)));
            if j < count {
                worst = Float::max(worst, rel);
            }
            if rel > tol {
                active.push(j);
            }
        }
        residual_trace.push(worst.as_f64());
        if worst <= tol {
            let values = lambda.iter().take(count).copied().collect();
            let vectors = x.columns(0, count).into_owned();
            return Ok(LobpcgOutcome {
                spectrum: Spectrum::new(values, Some(vectors), n, n),
                iterations: it,
                residual_trace,
            });
        }
        // Preconditioned residuals of the unconverged columns only.
        let mut w = r.select_columns(&active);
        precond.solve_mut(&mut w);
        let y = match &p {
            Some(p) => concat(&[&w, p]),
            None => w,
        };
        let q = orthonormal_complement(b, Some((&x, &bx)), y).ok_or_else(|| Error::EigenNotConverged {
            iterations: it,
            trace: residual_trace.clone(),
        })?;
        let s = concat(&[&x, &q]);
        let (new_x, values, coef) = rayleigh_ritz(a, &s, m).ok_or_else(|| Error::EigenNotConverged {
            iterations: it,
            trace: residual_trace.clone(),
        })?;
        // Search direction: the part of the update outside span(X).
        p = Some(&q * coef.rows(m, q.ncols()));
        x = new_x;
        lambda = values;
    }
    Err(Error::EigenNotConverged { iterations: opts.max_iterations, trace: residual_trace })
}

fn concat<T: LinalgReal>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let n = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, cols);
    let mut c = 0;
    for b in blocks {
        out.columns_mut(c, b.ncols()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// A B-orthonormal basis of the part of `span(Y)` that is B-orthogonal to
/// the B-orthonormal block `X` (given with `B X`). Nearly dependent
/// directions are dropped.
fn orthonormal_complement<T: LinalgReal>(
    b: &CsrMatrix<T>,
    x: Option<(&DMatrix<T>, &DMatrix<T>)>,
    mut y: DMatrix<T>,
) -> Option<DMatrix<T>> {
    let project = |y: &mut DMatrix<T>| {
        if let Some((x, bx)) = x {
            let c = bx.tr_mul(y);
            *y -= x * c;
        }
    };
    for j in 0..y.ncols() {
        let nrm = y.column(j).norm();
        if nrm > T::zero() {
            y.column_mut(j).unscale_mut(nrm);
        }
    }
    project(&mut y);
    project(&mut y);
    let mut out = y;
    // Two passes of Gram-eigen orthonormalization; the second removes the
    // error amplified by small Gram eigenvalues.
    for pass in 0..2 {
        let bq = b * &out;
        let g = out.tr_mul(&bq);
        let g = (&g + g.transpose()) * T::lit(0.5);
        let e = SymmetricEigen::try_new(g, T::default_epsilon(), 0)?;
        let dmax = e.eigenvalues.iter().fold(T::zero(), |acc, &d| Float::max(acc, d));
        if !(dmax > T::zero()) {
            return Some(DMatrix::zeros(out.nrows(), 0));
        }
        let rel = if pass == 0 { T::lit(1e-10) } else { T::lit(1e-4) };
        let cut = dmax * Float::max(rel, T::default_epsilon() * T::lit(64.0));
        let keep: Vec<usize> = (0..e.eigenvalues.len()).filter(|&i| e.eigenvalues[i] > cut).collect();
        let mut z = DMatrix::zeros(out.ncols(), keep.len());
        for (c, &i) in keep.iter().enumerate() {
            z.set_column(c, &(e.eigenvectors.column(i) / Float::sqrt(e.eigenvalues[i])));
        }
        out = &out * z;
        project(&mut out);
    }
    Some(out)
}

/// Rayleigh-Ritz on the B-orthonormal basis `S`: the lowest `m` Ritz
/// vectors, values and coefficient columns.
fn rayleigh_ritz<T: LinalgReal>(
    a: &CsrMatrix<T>,
    s: &DMatrix<T>,
    m: usize,
) -> Option<(DMatrix<T>, Vec<T>, DMatrix<T>)> {
    if s.ncols() < m {
        return None;
    }
    let g = s.tr_mul(&(a * s));
    let g = (&g + g.transpose()) * T::lit(0.5);
    let e = SymmetricEigen::try_new(g, T::default_epsilon(), 0)?;
    let mut order: Vec<usize> = (0..s.ncols()).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].partial_cmp(&e.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut coef = DMatrix::zeros(s.ncols(), m);
    let mut values = Vec::with_capacity(m);
    for (c, &i) in order.iter().take(m).enumerate() {
        coef.set_column(c, &e.eigenvectors.column(i));
        values.push(e.eigenvalues[i]);
    }
    Some((s * &coef, values, coef))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::GeneralizedEigProblem;
    use nalgebra_sparse::CooMatrix;

    /// 1D Neumann Laplacian with lumped mass, halved at the ends. The
    /// eigenvectors are `cos(k pi i / (n - 1))` with eigenvalues
    /// `(2 - 2 cos(k pi / (n - 1))) / h^2`.
    fn path(n: usize) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
        let h = 1.0 / n as f64;
        let mut a = CooMatrix::new(n, n);
        let mut b = CooMatrix::new(n, n);
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            a.push(i, i, deg / (h * h));
            b.push(i, i, if i == 0 || i == n - 1 { 0.5 } else { 1.0 });
            if i + 1 < n {
                a.push(i, i + 1, -1.0 / (h * h));
                a.push(i + 1, i, -1.0 / (h * h));
            }
        }
        (CsrMatrix::from(&a), CsrMatrix::from(&b))
    }

    #[test]
    fn matches_dense_solve() {
        let (a, b) = path(300);
        let out = lobpcg(&a, &b, 10, &LobpcgOptions::default()).unwrap();
        let dense = GeneralizedEigProblem::new(DMatrix::from(&a), DMatrix::from(&b)).unwrap().solve(300).unwrap();
        for k in 0..10 {
            let (x, y) = (out.spectrum.values()[k], dense.values()[k]);
            assert!((x - y).abs() <= 1e-7 * y.max(1.0), "{k}: {x} vs {y}");
        }
        assert!(out.iterations < 60, "{}", out.iterations);
        let v = out.spectrum.vectors().unwrap();
        let g = v.transpose() * (&b * v);
        assert!((g - DMatrix::identity(10, 10)).amax() < 1e-8);
    }

    #[test]
    fn many_eigenpairs_match_closed_form() {
        let n = 2000;
        let (a, b) = path(n);
        let h = 1.0 / n as f64;
        let out = match lobpcg(&a, &b, 60, &LobpcgOptions::default()) { Ok(o) => o, Err(e) => panic!("{e}") };
        for (k, &v) in out.spectrum.values().iter().enumerate() {
            let theta = k as f64 * std::f64::consts::PI / (n - 1) as f64;
            let exact = (2.0 - 2.0 * theta.cos()) / (h * h);
            assert!((v - exact).abs() <= 1e-7 * exact.max(1.0), "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let (a, b) = path(10);
        assert!(lobpcg(&a, &b, 0, &LobpcgOptions::default()).is_err());
        assert!(lobpcg(&a, &b, 11, &LobpcgOptions::default()).is_err());
    }
}
